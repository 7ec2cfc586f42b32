#include <sstream>

#include "check_code.hpp"
#include "doctest.h"
#include "topicforge/corpus.hpp"
#include "topicforge/rng.hpp"

using namespace topicforge;

namespace {

const std::string kFixtures = TF_FIXTURE_DIR;

NormalizationConfig ascii_tokens() {
  NormalizationConfig c;
  c.url_token = "URL";
  c.email_token = "EMAIL";
  c.user_token = "USER";
  c.digit_token = "NUM";
  return c;
}

Claim claim(std::string id, std::string topic, Label label = Label::kNotCheckWorthy) {
  Claim c;
  c.id = std::move(id);
  c.topic_id = std::move(topic);
  c.text = "x";
  c.raw_text = "x";
  c.label = label;
  return c;
}

Corpus sized(std::initializer_list<std::pair<const char*, int>> sizes) {
  std::vector<Claim> claims;
  for (const auto& [topic, n] : sizes) {
    for (int i = 0; i < n; ++i) claims.push_back(claim(std::string(topic) + "-" + std::to_string(i), topic));
  }
  return Corpus::from_claims(std::move(claims));
}

}  // namespace

TEST_CASE("labels") {
  CHECK(parse_label("1") == Label::kCheckWorthy);
  CHECK(parse_label("0") == Label::kNotCheckWorthy);
  CHECK(label_value(Label::kCheckWorthy) == 1);
  CHECK_CODE(parse_label("2"), ErrorCode::kUnknownLabel);
  CHECK_CODE(parse_label("yes"), ErrorCode::kUnknownLabel);
}

TEST_CASE("normalize: worked examples") {
  CHECK(normalize_text("") == "");
  CHECK(normalize_text("see https://x.co NOW!!") == "see [رابط] NOW");
  CHECK(normalize_text("call 112 #help") == "call [رقم] help");
}

TEST_CASE("normalize: each replacement") {
  const NormalizationConfig c = ascii_tokens();
  CHECK(normalize_text("mail me at a.b@example.org today", c) == "mail me at EMAIL today");
  CHECK(normalize_text("@news_24 reports", c) == "USER reports");
  CHECK(normalize_text("visit www.example.com/page?x=1.", c) == "visit URL");
  CHECK(normalize_text("<b>bold</b> &amp; plain", c) == "bold plain");
  CHECK(normalize_text("rose 1,200 and 3.5 percent", c) == "rose NUM and NUM percent");
  CHECK(normalize_text("عدد ١٢٣ حالة", c) == "عدد NUM حالة");
  CHECK(normalize_text("great \xF0\x9F\x98\x80 news", c) == "great news");
  CHECK(normalize_text("  many \t\n spaces  ", c) == "many spaces");
  // tatweel is dropped, letters survive
  CHECK(normalize_text("جـــميل", c) == "جميل");
}

TEST_CASE("normalize: flags off keep the material") {
  NormalizationConfig c = ascii_tokens();
  c.strip_punctuation = false;
  c.strip_emoji = false;
  c.strip_html = false;
  CHECK(normalize_text("wow! \xF0\x9F\x98\x80", c) == "wow! \xF0\x9F\x98\x80");
  CHECK(normalize_text("<i>x</i>", c) == "<i>x</i>");
}

TEST_CASE("normalize: config validation and json") {
  NormalizationConfig c;
  c.digit_token = "two words";
  CHECK_CODE(c.validate(), ErrorCode::kInvalidArgument);
  c.digit_token = "";
  CHECK_CODE(c.validate(), ErrorCode::kInvalidArgument);
  const NormalizationConfig d = ascii_tokens();
  const NormalizationConfig back = NormalizationConfig::from_json(d.to_json());
  CHECK(back.url_token == "URL");
  CHECK(back.digit_token == "NUM");
  CHECK_CODE(NormalizationConfig::from_json({{"bogus", 1}}), ErrorCode::kConfig);
}

TEST_CASE("normalize: idempotent on generated text") {
  const std::vector<std::string> pieces = {
      "word", "كلمة", " ", "  ", "\t", "\n", "!", "?", "#", "#tag", "@user", "@", "http://a.b/c", "https://x.co",
      "www.site.org", "me@mail.com", "@mail.com", "12", "1,000", "3.5", "١٢٣", "۴۵", "<p>", "</div>", "&amp;",
      "&#1234;", "<", ">", "\xF0\x9F\x98\x80", "\xE2\x9C\x93", "ـ", "\xE2\x80\x8B", "[رقم]", "[رابط]", "NUM", "\x1F",
      "(", ")", ".", ",", "،", "؟", "\xC2\xA0", "a1b2", "x-y", "\"", "'", "_", "..", "URL", "e\xCC\x81"};
  std::vector<NormalizationConfig> configs = {NormalizationConfig{}, ascii_tokens()};
  NormalizationConfig loose = ascii_tokens();
  loose.strip_punctuation = loose.strip_emoji = loose.strip_html = false;
  configs.push_back(loose);

  SplitMix64 rng(20240611);
  for (int trial = 0; trial < 3000; ++trial) {
    std::string text;
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) text += pieces[rng.below(pieces.size())];
    for (const NormalizationConfig& c : configs) {
      const std::string once = normalize_text(text, c);
      INFO("input: " << text);
      REQUIRE(normalize_text(once, c) == once);
    }
  }
}

TEST_CASE("load: jsonl fixture") {
  const Corpus c = load_corpus(kFixtures + "/three.jsonl");
  REQUIRE(c.size() == 3);
  CHECK(c.topic_ids() == std::vector<std::string>{"T1"});
  CHECK(c.claims()[2].id == "3");
  CHECK(c.claims()[2].check_worthy());
  CHECK_FALSE(c.claims()[1].check_worthy());
  CHECK(c.claims()[1].text == "Good morning everyone");
  CHECK(c.claims()[0].raw_text.find("https://") != std::string::npos);
  CHECK(c.claims()[0].text.find("https://") == std::string::npos);
}

TEST_CASE("load: contract violations") {
  CHECK_CODE(load_corpus(kFixtures + "/bad_label.jsonl"), ErrorCode::kUnknownLabel);
  CHECK_CODE(load_corpus(kFixtures + "/dup_id.jsonl"), ErrorCode::kDuplicateId);
  CHECK_CODE(load_corpus(kFixtures + "/missing.jsonl"), ErrorCode::kIo);
  try {
    load_corpus(kFixtures + "/malformed.jsonl");
    FAIL("expected MalformedRecord");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedRecord);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream missing_field(R"({"id":"a","topic":"t","label":1})");
  CHECK_CODE(parse_corpus(missing_field, CorpusFormat::kJsonLines), ErrorCode::kMalformedRecord);
}

TEST_CASE("load: delimited text with a column mapping") {
  LoadOptions opt;
  opt.columns = {"tweet_id", "topic_id", "tweet_text", "claim_worthiness"};
  const Corpus c = load_corpus(kFixtures + "/columns.tsv", opt);
  REQUIRE(c.size() == 2);
  CHECK(c.topic_ids() == std::vector<std::string>{"T1", "T2"});
  CHECK(c.at("x1").text == "cases rose to [رقم] today");
  CHECK_CODE(load_corpus(kFixtures + "/columns.tsv"), ErrorCode::kMalformedRecord);

  NormalizationConfig keep = ascii_tokens();
  keep.strip_punctuation = false;
  LoadOptions q;
  q.normalization = keep;
  const Corpus quoted = load_corpus(kFixtures + "/quoted.csv", q);
  REQUIRE(quoted.size() == 2);
  CHECK(quoted.at("q1").raw_text == "commas, inside \"quotes\"");
  CHECK(quoted.at("q2").raw_text == "line one\nline two");
  CHECK(quoted.at("q2").text == "line one line two");
}

TEST_CASE("load: round trip through the canonical format") {
  LoadOptions opt;
  opt.columns = {"tweet_id", "topic_id", "tweet_text", "claim_worthiness"};
  for (const Corpus& original : {load_corpus(kFixtures + "/three.jsonl"), load_corpus(kFixtures + "/columns.tsv", opt)}) {
    std::stringstream buf;
    write_corpus(buf, original);
    const Corpus back = parse_corpus(buf, CorpusFormat::kJsonLines);
    REQUIRE(back.size() == original.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back.claims()[i].id == original.claims()[i].id);
      CHECK(back.claims()[i].topic_id == original.claims()[i].topic_id);
      CHECK(back.claims()[i].label == original.claims()[i].label);
      CHECK(back.claims()[i].text == original.claims()[i].text);
    }
  }
}

TEST_CASE("corpus: topic partition") {
  const Corpus c = sized({{"A", 3}, {"B", 2}, {"C", 4}});
  std::size_t total = 0;
  for (const std::string& t : c.topic_ids()) total += c.topic_members(t).size();
  CHECK(total == c.size());
  CHECK(c.topic_claim_ids("B") == std::vector<std::string>{"B-0", "B-1"});
  CHECK_CODE(c.topic_members("Z"), ErrorCode::kUnknownTopic);
  CHECK(c.find("nope") == nullptr);
}

TEST_CASE("merge_topics") {
  const Corpus c = sized({{"T1", 2}, {"T2", 3}, {"T3", 4}});
  const Corpus m = merge_topics(c, {{"M", {"T1", "T2"}}});
  CHECK(m.topic_ids() == std::vector<std::string>{"M", "T3"});
  CHECK(m.topic_members("M").size() == 5);
  CHECK(m.topic_members("T3").size() == 4);
  CHECK(m.size() == 9);

  CHECK(merge_topics(c, {}) == c);
  CHECK_CODE(merge_topics(c, {{"M", {"T1", "T9"}}}), ErrorCode::kUnknownTopic);
  CHECK_CODE(merge_topics(c, {{"M", {"T1", "T2"}}, {"N", {"T2", "T3"}}}), ErrorCode::kOverlappingGroups);
  CHECK_CODE(merge_topics(c, {{"T3", {"T1", "T2"}}}), ErrorCode::kOverlappingGroups);
}
