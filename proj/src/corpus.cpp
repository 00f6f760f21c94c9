#include "carryover/corpus.hpp"

#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace carryover {

using nlohmann::json;

namespace {

std::string bucket_of(int d) {
  if (d <= 2) return std::to_string(d);
  return ">=3";
}

// Whitespace split without case folding (intent names keep camelCase).
std::vector<std::string> split_ws(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Speaker parse_speaker(const std::string& s, std::size_t line_no) {
  if (s == "user") return Speaker::User;
  if (s == "agent") return Speaker::Agent;
  throw ParseError("line " + std::to_string(line_no) + ": unknown speaker '" +
                   s + "'");
}

json read_header_checked(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("empty corpus: missing header line");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception&) {
    throw ParseError("line 1: header is not valid JSON");
  }
  if (!header.contains("format") || header["format"] != kCorpusMagic)
    throw ParseError("line 1: missing corpus format magic");
  if (!header.contains("version") ||
      header["version"].get<int>() != kCorpusVersion)
    throw VersionMismatch("corpus version is not " +
                          std::to_string(kCorpusVersion));
  return header;
}

struct RawSlot {
  Slot source;
  std::string mapped_key;
  bool has_score = false;
  double score = 0.0;
};

struct RawRecord {
  Dialogue dialogue;
  std::vector<RawSlot> slots;
  std::vector<std::size_t> labels;
  std::string domain;
};

RawRecord parse_record(const std::string& line, std::size_t line_no,
                       bool prefer_asr) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": invalid JSON");
  }
  try {
    RawRecord out;
    std::vector<std::pair<Speaker, std::vector<std::string>>> turns;
    for (const auto& turn : rec.at("turns")) {
      const Speaker speaker =
          parse_speaker(turn.at("speaker").get<std::string>(), line_no);
      std::string text = turn.at("text").get<std::string>();
      if (prefer_asr && speaker == Speaker::User && turn.contains("asr"))
        text = turn["asr"].get<std::string>();
      turns.emplace_back(speaker, tokenize(text));
    }
    Intent intent{split_ws(rec.at("intent").get<std::string>())};
    out.dialogue = build_dialogue(turns, intent);
    out.domain = rec.value("domain", std::string("default"));
    for (const auto& s : rec.at("slots")) {
      RawSlot raw;
      raw.mapped_key = s.at("key").get<std::string>();
      raw.source.key = s.value("source_key", raw.mapped_key);
      raw.source.distance = s.at("distance").get<int>();
      raw.source.span_left = s.at("span").at(0).get<int>();
      raw.source.span_right = s.at("span").at(1).get<int>();
      if (s.contains("slu_score")) {
        raw.has_score = true;
        raw.score = s["slu_score"].get<double>();
      }
      out.slots.push_back(raw);
    }
    for (const auto& l : rec.at("labels"))
      out.labels.push_back(l.get<std::size_t>());
    return out;
  } catch (const json::exception& e) {
    throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

CarryoverInstance finish_instance(const RawRecord& raw, std::size_t line_no) {
  CarryoverInstance inst;
  inst.dialogue = raw.dialogue;
  for (const RawSlot& s : raw.slots)
    inst.candidates.push_back(
        CandidateSlot{s.source, s.mapped_key, raw.domain});
  inst.labels.insert(raw.labels.begin(), raw.labels.end());
  try {
    validate_instance(inst);
  } catch (const Error& e) {
    throw InvariantViolation("line " + std::to_string(line_no) + ": " +
                             e.what());
  }
  return inst;
}

}  // namespace

std::vector<CarryoverInstance> parse_corpus(std::istream& in) {
  read_header_checked(in);
  std::vector<CarryoverInstance> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    out.push_back(
        finish_instance(parse_record(line, line_no, false), line_no));
  }
  return out;
}

void serialize_corpus(const std::vector<CarryoverInstance>& instances,
                      std::ostream& out) {
  out << json{{"format", kCorpusMagic}, {"version", kCorpusVersion}}.dump()
      << '\n';
  for (const CarryoverInstance& inst : instances) {
    json turns = json::array();
    for (const Utterance& utt : inst.dialogue.utterances) {
      turns.push_back(
          {{"speaker", utt.speaker == Speaker::User ? "user" : "agent"},
           {"text", join(utt.tokens)}});
    }
    json slots = json::array();
    for (const CandidateSlot& c : inst.candidates) {
      json s = {{"key", c.mapped_key},
                {"distance", c.source.distance},
                {"span", {c.source.span_left, c.source.span_right}}};
      if (c.source.key != c.mapped_key) s["source_key"] = c.source.key;
      slots.push_back(s);
    }
    json labels = json::array();
    for (std::size_t l : inst.labels) labels.push_back(l);
    out << json{{"turns", turns},
                {"intent", join(inst.dialogue.current_intent.tokens)},
                {"domain",
                 inst.candidates.empty() ? "default"
                                         : inst.candidates[0].domain},
                {"slots", slots},
                {"labels", labels}}
               .dump()
        << '\n';
  }
}

long CorpusStats::total_candidates() const {
  long n = 0;
  for (const auto& [k, v] : total_by_distance) n += v;
  return n;
}

CorpusStats compute_stats(const std::vector<CarryoverInstance>& instances,
                          const EmbeddingTable* table) {
  CorpusStats stats;
  for (const char* b : {"0", "1", "2", ">=3"}) {
    stats.total_by_distance[b] = 0;
    stats.positive_by_distance[b] = 0;
  }
  for (const CarryoverInstance& inst : instances) {
    stats.instances += 1;
    for (std::size_t j = 0; j < inst.candidates.size(); ++j) {
      const std::string b = bucket_of(inst.candidates[j].source.distance);
      stats.total_by_distance[b] += 1;
      if (inst.labels.count(j)) stats.positive_by_distance[b] += 1;
    }
    for (const Utterance& utt : inst.dialogue.utterances) {
      for (const std::string& tok : utt.tokens) {
        stats.tokens += 1;
        if (table != nullptr && !table->contains(tok)) stats.oov_tokens += 1;
      }
    }
  }
  return stats;
}

std::vector<CarryoverInstance> ingest_dstc2_like(std::istream& in,
                                                 double threshold) {
  read_header_checked(in);
  std::vector<CarryoverInstance> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    RawRecord raw = parse_record(line, line_no, /*prefer_asr=*/true);

    RawRecord filtered;
    filtered.dialogue = raw.dialogue;
    filtered.domain = raw.domain;
    std::vector<long> remap(raw.slots.size(), -1);
    for (std::size_t i = 0; i < raw.slots.size(); ++i) {
      const RawSlot& s = raw.slots[i];
      if (s.source.distance % 2 != 0) continue;  // user-mentioned slots only
      if (s.source.distance >= 1) {
        if (!s.has_score)
          throw MissingScore("line " + std::to_string(line_no) +
                             ": context slot without slu_score");
        if (!(s.score > threshold)) continue;  // strict inequality
      }
      remap[i] = static_cast<long>(filtered.slots.size());
      filtered.slots.push_back(s);
    }
    for (std::size_t l : raw.labels) {
      if (l < remap.size() && remap[l] >= 0)
        filtered.labels.push_back(static_cast<std::size_t>(remap[l]));
    }
    out.push_back(finish_instance(filtered, line_no));
  }
  return out;
}

// ---- report serialization ------------------------------------------------

std::string report_table(const EvalReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "bucket      P        R        F1       count\n";
  for (const auto& [label, stats] : report.by_distance) {
    os << std::left << std::setw(10) << label << "  " << stats.prf.precision
       << "   " << stats.prf.recall << "   " << stats.prf.f1 << "   "
       << stats.total << "\n";
  }
  if (!report.grid.empty()) {
    os << "\nS_Final x S_Carry grid (F1 / instances)\n";
    for (const auto& [key, cell] : report.grid) {
      os << "(" << key.first << "," << key.second << ")  " << cell.f1 << " / "
         << cell.instances << "\n";
    }
  }
  return os.str();
}

std::string report_json(const EvalReport& report) {
  json j;
  j["overall"] = {{"precision", report.overall.precision},
                  {"recall", report.overall.recall},
                  {"f1", report.overall.f1}};
  j["total_candidates"] = report.total_candidates;
  json buckets = json::array();
  for (const auto& [label, stats] : report.by_distance) {
    buckets.push_back({{"bucket", label},
                       {"precision", stats.prf.precision},
                       {"recall", stats.prf.recall},
                       {"f1", stats.prf.f1},
                       {"tp", stats.tp},
                       {"fp", stats.fp},
                       {"fn", stats.fn},
                       {"count", stats.total}});
  }
  j["by_distance"] = buckets;
  json grid = json::array();
  for (const auto& [key, cell] : report.grid) {
    grid.push_back({{"s_final", key.first},
                    {"s_carry", key.second},
                    {"f1", cell.f1},
                    {"instances", cell.instances}});
  }
  j["grid"] = grid;
  return j.dump(2);
}

}  // namespace carryover
