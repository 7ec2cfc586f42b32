#include <fstream>
#include <set>
#include <sstream>

#include "topicforge/corpus.hpp"
#include "topicforge/error.hpp"

namespace topicforge {

Label parse_label(std::string_view value) {
  std::string_view v = value;
  while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
  while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.remove_suffix(1);
  if (v == "1") return Label::kCheckWorthy;
  if (v == "0") return Label::kNotCheckWorthy;
  raise(ErrorCode::kUnknownLabel, "label '" + std::string(value) + "' is not 0 or 1");
}

Corpus Corpus::from_claims(std::vector<Claim> claims) {
  Corpus c;
  c.claims_ = std::move(claims);
  c.by_id_.reserve(c.claims_.size());
  for (std::size_t i = 0; i < c.claims_.size(); ++i) {
    const Claim& claim = c.claims_[i];
    if (!c.by_id_.emplace(claim.id, i).second) {
      raise(ErrorCode::kDuplicateId, "claim id '" + claim.id + "' appears more than once");
    }
    auto it = c.topics_.find(claim.topic_id);
    if (it == c.topics_.end()) {
      c.topic_order_.push_back(claim.topic_id);
      it = c.topics_.emplace(claim.topic_id, std::vector<std::size_t>{}).first;
    }
    it->second.push_back(i);
  }
  return c;
}

bool Corpus::has_topic(std::string_view topic_id) const { return topics_.find(topic_id) != topics_.end(); }

const std::vector<std::size_t>& Corpus::topic_members(std::string_view topic_id) const {
  auto it = topics_.find(topic_id);
  if (it == topics_.end()) raise(ErrorCode::kUnknownTopic, "topic '" + std::string(topic_id) + "'");
  return it->second;
}

std::vector<std::string> Corpus::topic_claim_ids(std::string_view topic_id) const {
  std::vector<std::string> ids;
  for (std::size_t i : topic_members(topic_id)) ids.push_back(claims_[i].id);
  return ids;
}

std::vector<Claim> Corpus::topic_claims(std::string_view topic_id) const {
  std::vector<Claim> out;
  for (std::size_t i : topic_members(topic_id)) out.push_back(claims_[i]);
  return out;
}

const Claim* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &claims_[it->second];
}

const Claim& Corpus::at(std::string_view id) const {
  const Claim* c = find(id);
  if (c == nullptr) raise(ErrorCode::kInvalidArgument, "unknown claim id '" + std::string(id) + "'");
  return *c;
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "auto") return CorpusFormat::kAuto;
  if (name == "jsonl" || name == "ndjson") return CorpusFormat::kJsonLines;
  if (name == "csv") return CorpusFormat::kCsv;
  if (name == "tsv") return CorpusFormat::kTsv;
  raise(ErrorCode::kInvalidArgument, "unknown corpus format '" + std::string(name) + "'");
}

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& reason) {
  raise(ErrorCode::kMalformedRecord, "line " + std::to_string(line) + ": " + reason);
}

Claim make_claim(std::string id, std::string topic, std::string raw, std::string_view label,
                 const NormalizationConfig& norm) {
  Claim c;
  c.id = std::move(id);
  c.topic_id = std::move(topic);
  c.raw_text = std::move(raw);
  c.text = normalize_text(c.raw_text, norm);
  c.label = parse_label(label);
  return c;
}

std::string json_field_as_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  return v.dump();
}

std::vector<Claim> read_json_lines(std::istream& in, const LoadOptions& opt) {
  std::vector<Claim> claims;
  const ColumnMapping& m = opt.columns;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      malformed(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) malformed(line_no, "record is not a JSON object");
    for (const std::string* field : {&m.id, &m.topic, &m.text, &m.label}) {
      if (!rec.contains(*field)) malformed(line_no, "missing field '" + *field + "'");
    }
    if (!rec[m.text].is_string()) malformed(line_no, "field '" + m.text + "' is not a string");
    claims.push_back(make_claim(json_field_as_string(rec[m.id]), json_field_as_string(rec[m.topic]),
                                rec[m.text].get<std::string>(), json_field_as_string(rec[m.label]),
                                opt.normalization));
  }
  return claims;
}

// RFC 4180 style: quoted fields may contain delimiters, doubled quotes and
// newlines. Returns false at end of input.
bool read_delimited_record(std::istream& in, char delim, std::vector<std::string>& fields,
                           std::size_t& line_no) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  bool was_quoted = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !was_quoted) {
      in_quotes = true;
      was_quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '\n') {
      ++line_no;
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (in_quotes) malformed(line_no + 1, "unterminated quoted field");
  if (!any) return false;
  fields.push_back(std::move(field));
  ++line_no;
  return true;
}

std::vector<Claim> read_delimited(std::istream& in, char delim, const LoadOptions& opt) {
  std::vector<std::string> header;
  std::size_t line_no = 0;
  if (!read_delimited_record(in, delim, header, line_no)) return {};
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    malformed(1, "header has no column '" + name + "'");
  };
  const ColumnMapping& m = opt.columns;
  const std::size_t id_col = column(m.id);
  const std::size_t topic_col = column(m.topic);
  const std::size_t text_col = column(m.text);
  const std::size_t label_col = column(m.label);

  std::vector<Claim> claims;
  std::vector<std::string> fields;
  while (true) {
    const std::size_t record_line = line_no + 1;
    if (!read_delimited_record(in, delim, fields, line_no)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != header.size()) {
      malformed(record_line, "expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
    }
    claims.push_back(make_claim(fields[id_col], fields[topic_col], fields[text_col], fields[label_col],
                                opt.normalization));
  }
  return claims;
}

CorpusFormat detect_format(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return CorpusFormat::kCsv;
  if (ext == ".tsv" || ext == ".tab") return CorpusFormat::kTsv;
  return CorpusFormat::kJsonLines;
}

}  // namespace

Corpus parse_corpus(std::istream& in, CorpusFormat format, const LoadOptions& options) {
  options.normalization.validate();
  switch (format) {
    case CorpusFormat::kCsv: return Corpus::from_claims(read_delimited(in, ',', options));
    case CorpusFormat::kTsv: return Corpus::from_claims(read_delimited(in, '\t', options));
    default: return Corpus::from_claims(read_json_lines(in, options));
  }
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::kIo, "cannot open corpus file '" + path.string() + "'");
  const CorpusFormat format = options.format == CorpusFormat::kAuto ? detect_format(path) : options.format;
  return parse_corpus(in, format, options);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const Claim& c : corpus.claims()) {
    nlohmann::json rec = {{"id", c.id}, {"topic", c.topic_id}, {"text", c.text}, {"label", label_value(c.label)}};
    out << rec.dump() << '\n';
  }
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  write_corpus(out, corpus);
}

Corpus merge_topics(const Corpus& corpus, const TopicGroups& groups) {
  std::map<std::string, std::string> reassign;
  for (const auto& [new_id, members] : groups) {
    for (const std::string& t : members) {
      if (!corpus.has_topic(t)) raise(ErrorCode::kUnknownTopic, "topic '" + t + "' named in merge group '" + new_id + "'");
      if (!reassign.emplace(t, new_id).second) {
        raise(ErrorCode::kOverlappingGroups, "topic '" + t + "' appears in more than one merge group");
      }
    }
  }
  for (const auto& [new_id, members] : groups) {
    if (corpus.has_topic(new_id) && !reassign.contains(new_id)) {
      raise(ErrorCode::kOverlappingGroups, "merged topic id '" + new_id + "' collides with an existing topic");
    }
  }
  if (reassign.empty()) return corpus;

  // Emit topic by topic so that a merged topic sits where its first member
  // was and keeps its members' claims in their original order.
  std::vector<Claim> claims;
  claims.reserve(corpus.size());
  std::set<std::string> emitted;
  for (const std::string& topic : corpus.topic_ids()) {
    auto it = reassign.find(topic);
    const std::string target = it == reassign.end() ? topic : it->second;
    if (!emitted.insert(target).second) continue;
    for (const std::string& member_topic : corpus.topic_ids()) {
      auto m = reassign.find(member_topic);
      const std::string dest = m == reassign.end() ? member_topic : m->second;
      if (dest != target) continue;
      for (std::size_t i : corpus.topic_members(member_topic)) {
        Claim c = corpus.claims()[i];
        c.topic_id = target;
        claims.push_back(std::move(c));
      }
    }
  }
  return Corpus::from_claims(std::move(claims));
}

}  // namespace topicforge
