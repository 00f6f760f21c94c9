#pragma once

#include <stdexcept>
#include <string>

namespace carryover {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define CARRYOVER_DEFINE_ERROR(Name)          \
  struct Name : Error {                       \
    using Error::Error;                       \
    Name() : Error(#Name) {}                  \
  }

// tensor-kernel
CARRYOVER_DEFINE_ERROR(ShapeMismatch);
CARRYOVER_DEFINE_ERROR(DomainError);
CARRYOVER_DEFINE_ERROR(InvalidRate);
CARRYOVER_DEFINE_ERROR(NonScalarLoss);
CARRYOVER_DEFINE_ERROR(TapeFinalized);

// dialogue-model
CARRYOVER_DEFINE_ERROR(EmptyDialogue);
CARRYOVER_DEFINE_ERROR(AlternationViolation);
CARRYOVER_DEFINE_ERROR(LastTurnNotUser);
CARRYOVER_DEFINE_ERROR(DistanceOutOfRange);
CARRYOVER_DEFINE_ERROR(SpanOutOfRange);

// embeddings
CARRYOVER_DEFINE_ERROR(InconsistentDim);
CARRYOVER_DEFINE_ERROR(EmptyFile);
CARRYOVER_DEFINE_ERROR(UnparsableLine);
CARRYOVER_DEFINE_ERROR(EmptyTokenList);

// encoders
CARRYOVER_DEFINE_ERROR(EmptyKey);
CARRYOVER_DEFINE_ERROR(EmptyIntent);
CARRYOVER_DEFINE_ERROR(NegativeDistance);

// candidate-gen
CARRYOVER_DEFINE_ERROR(ZeroVector);
CARRYOVER_DEFINE_ERROR(EmptySchema);

// training-eval
CARRYOVER_DEFINE_ERROR(EmptyDataset);
CARRYOVER_DEFINE_ERROR(NonFiniteLoss);

// cli-io
CARRYOVER_DEFINE_ERROR(ParseError);
CARRYOVER_DEFINE_ERROR(InvariantViolation);
CARRYOVER_DEFINE_ERROR(MissingScore);
CARRYOVER_DEFINE_ERROR(VersionMismatch);
CARRYOVER_DEFINE_ERROR(CorruptCheckpoint);

#undef CARRYOVER_DEFINE_ERROR

}  // namespace carryover
