#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "convote/corpus.hpp"
#include "convote/errors.hpp"

using namespace convote;

namespace {

std::filesystem::path make_temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("convote_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("parse_corpus round-trips a well-formed debate file") {
  auto dir = make_temp_dir("parse_ok");
  write_file(dir / "d1.jsonl",
             R"({"segment_index":0,"speaker_id":"A","speaker_names":["Mr. Adams"],"vote":"Y","text":"i support this bill"}
{"segment_index":1,"speaker_id":"B","speaker_names":["Mr. Baker"],"vote":"N","text":"i oppose it"}
{"segment_index":2,"speaker_id":"A","speaker_names":["Mr. Adams"],"vote":"Y","text":"again in favor"}
)");
  auto debates = parse_corpus(dir);
  REQUIRE(debates.size() == 1);
  const Debate& debate = debates[0];
  CHECK(debate.debate_id == "d1");
  REQUIRE(debate.segments.size() == 3);
  CHECK(debate.segments[0].tokens ==
        std::vector<std::string>{"i", "support", "this", "bill"});
  CHECK(debate.segments[0].vote == Vote::Yea);
  CHECK(debate.segments[1].vote == Vote::Nay);
  CHECK(debate.speaker_names.at("A") ==
        std::vector<std::vector<std::string>>{{"mr", "adams"}});
  std::filesystem::remove_all(dir);
}

TEST_CASE("parse_corpus on an empty directory returns an empty list") {
  auto dir = make_temp_dir("parse_empty");
  CHECK(parse_corpus(dir).empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("parse_corpus error paths") {
  SUBCASE("conflicting votes for one speaker") {
    auto dir = make_temp_dir("parse_conflict");
    write_file(dir / "d1.jsonl",
               R"({"segment_index":0,"speaker_id":"A","speaker_names":["A"],"vote":"Y","text":"one"}
{"segment_index":1,"speaker_id":"A","speaker_names":["A"],"vote":"N","text":"two"}
)");
    CHECK_THROWS_AS(parse_corpus(dir), IntegrityError);
    std::filesystem::remove_all(dir);
  }
  SUBCASE("duplicate segment index") {
    auto dir = make_temp_dir("parse_dup");
    write_file(dir / "d1.jsonl",
               R"({"segment_index":0,"speaker_id":"A","speaker_names":["A"],"vote":"Y","text":"one"}
{"segment_index":0,"speaker_id":"B","speaker_names":["B"],"vote":"N","text":"two"}
)");
    CHECK_THROWS_AS(parse_corpus(dir), IntegrityError);
    std::filesystem::remove_all(dir);
  }
  SUBCASE("malformed record names file and line") {
    auto dir = make_temp_dir("parse_bad");
    write_file(dir / "d1.jsonl", "{not json}\n");
    try {
      parse_corpus(dir);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("d1.jsonl:1") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("filter policies") {
  Debate debate;
  debate.debate_id = "d";
  auto add = [&](const std::string& text) {
    SpeechSegment segment;
    segment.debate_id = "d";
    segment.segment_index = static_cast<int>(debate.segments.size());
    segment.original_index = segment.segment_index;
    segment.speaker_id = "A";
    segment.raw_text = text;
    for (const char* t = text.c_str();;) {  // crude split on spaces
      const char* end = t;
      while (*end && *end != ' ') ++end;
      if (end != t) segment.tokens.emplace_back(t, end);
      if (!*end) break;
      t = end + 1;
    }
    segment.vote = Vote::Yea;
    debate.segments.push_back(std::move(segment));
  };
  add("i yield 5 minutes to the gentleman");
  add("this amendment is bad");
  add("plain remarks on the bill");
  add("yielding time once more");
  debate.speaker_names["A"] = {{"a"}};

  const Debate eval = filter_segments(debate, FilterPolicy::Evaluation);
  const Debate mining = filter_segments(debate, FilterPolicy::AgreementMining);
  const Debate training =
      filter_segments(debate, FilterPolicy::AgreementTrainingWithAmendments);

  REQUIRE(eval.segments.size() == 1);
  CHECK(eval.segments[0].raw_text == "plain remarks on the bill");
  CHECK(eval.segments[0].segment_index == 0);
  CHECK(eval.segments[0].original_index == 2);

  REQUIRE(mining.segments.size() == 3);  // yield segments retained
  CHECK(training.segments.size() == 4);  // everything retained

  // filter monotonicity by provenance index
  auto provenance = [](const Debate& d) {
    std::set<int> out;
    for (const auto& segment : d.segments) out.insert(segment.original_index);
    return out;
  };
  const auto eval_ids = provenance(eval);
  const auto mining_ids = provenance(mining);
  const auto training_ids = provenance(training);
  CHECK(std::includes(mining_ids.begin(), mining_ids.end(), eval_ids.begin(),
                      eval_ids.end()));
  CHECK(std::includes(training_ids.begin(), training_ids.end(),
                      mining_ids.begin(), mining_ids.end()));
}

TEST_CASE("split_debates") {
  auto make_n = [](int n) {
    std::vector<Debate> debates;
    for (int i = 0; i < n; ++i) {
      Debate debate;
      debate.debate_id = "d" + std::to_string(i);
      debates.push_back(std::move(debate));
    }
    return debates;
  };

  SUBCASE("53 debates at 0.7/0.2/0.1 reproduce 38/10/5") {
    auto split = split_debates(make_n(53), {0.7, 0.2, 0.1}, 42);
    CHECK(split.train.size() == 38);
    CHECK(split.test.size() == 10);
    CHECK(split.dev.size() == 5);
  }
  SUBCASE("single debate, all-train ratios") {
    auto split = split_debates(make_n(1), {1.0, 0.0, 0.0}, 0);
    CHECK(split.train.size() == 1);
    CHECK(split.test.empty());
    CHECK(split.dev.empty());
  }
  SUBCASE("deterministic and disjoint for any seed") {
    for (std::uint64_t seed : {0ull, 7ull, 123456789ull}) {
      auto a = split_debates(make_n(20), {0.5, 0.3, 0.2}, seed);
      auto b = split_debates(make_n(20), {0.5, 0.3, 0.2}, seed);
      auto ids = [](const CorpusSplit& s) {
        std::vector<std::string> out;
        for (const auto* bucket : {&s.train, &s.test, &s.dev})
          for (const auto& debate : *bucket) out.push_back(debate.debate_id);
        return out;
      };
      CHECK(ids(a) == ids(b));
      auto all = ids(a);
      std::set<std::string> unique(all.begin(), all.end());
      CHECK(unique.size() == 20);
      CHECK(all.size() == 20);
    }
  }
  SUBCASE("fewer debates than nonzero buckets is an error") {
    CHECK_THROWS_AS(split_debates(make_n(2), {0.5, 0.3, 0.2}, 0), ConfigError);
  }
  SUBCASE("ratios must sum to one") {
    CHECK_THROWS_AS(split_debates(make_n(5), {0.5, 0.3, 0.1}, 0), ConfigError);
  }
}

TEST_CASE("synthetic debate generation") {
  SyntheticSpec spec = default_synthetic_spec();
  spec.speakers = 4;
  spec.segments_per_speaker = 2;
  spec.cue_rate = 0.0;
  spec.disagreement_cue_rate = 0.0;
  spec.neutral_mention_rate = 0.0;

  SUBCASE("cue rate 0 yields no cross-speaker references") {
    Debate debate = generate_synthetic_debate(spec, 5);
    CHECK(debate.segments.size() == 8);
    // no segment may contain any other speaker's surname
    for (const auto& segment : debate.segments) {
      for (const auto& [speaker, names] : debate.speaker_names) {
        if (speaker == segment.speaker_id) continue;
        for (const auto& name : names)
          for (std::size_t pos = 0; pos + name.size() <= segment.tokens.size(); ++pos) {
            bool match = true;
            for (std::size_t k = 0; k < name.size(); ++k)
              if (segment.tokens[pos + k] != name[k]) match = false;
            CHECK_FALSE(match);
          }
      }
    }
  }
  SUBCASE("determinism: same spec and seed give token-identical debates") {
    spec.cue_rate = 0.5;
    Debate a = generate_synthetic_debate(spec, 99);
    Debate b = generate_synthetic_debate(spec, 99);
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
      CHECK(a.segments[i].tokens == b.segments[i].tokens);
      CHECK(a.segments[i].speaker_id == b.segments[i].speaker_id);
      CHECK(a.segments[i].vote == b.segments[i].vote);
    }
  }
  SUBCASE("cue rate 1.0 plants a reference in every speaker's first segment") {
    spec.speakers = 10;
    spec.cue_rate = 1.0;
    Debate debate = generate_synthetic_debate(spec, 3);
    std::set<std::string> seen;
    for (const auto& segment : debate.segments) {
      if (seen.count(segment.speaker_id)) continue;
      seen.insert(segment.speaker_id);
      bool found = false;
      for (const auto& [speaker, names] : debate.speaker_names) {
        if (speaker == segment.speaker_id) continue;
        for (const auto& name : names)
          for (std::size_t pos = 0; pos + name.size() <= segment.tokens.size(); ++pos) {
            bool match = true;
            for (std::size_t k = 0; k < name.size(); ++k)
              if (segment.tokens[pos + k] != name[k]) match = false;
            if (match) found = true;
          }
      }
      CHECK(found);
    }
    CHECK(seen.size() == 10);
  }
  SUBCASE("degenerate vote split is rejected") {
    spec.speakers = 2;
    spec.yea_fraction = 0.1;  // rounds to zero yea speakers
    CHECK_THROWS_AS(generate_synthetic_debate(spec, 1), ConfigError);
  }
  SUBCASE("label coherence: one vote per speaker") {
    spec.speakers = 9;
    spec.cue_rate = 0.7;
    Debate debate = generate_synthetic_debate(spec, 17);
    std::map<std::string, Vote> votes;
    for (const auto& segment : debate.segments) {
      REQUIRE(segment.vote.has_value());
      auto [it, inserted] = votes.emplace(segment.speaker_id, *segment.vote);
      if (!inserted) CHECK(it->second == *segment.vote);
    }
  }
}

TEST_CASE("synthetic corpus write/parse round-trip") {
  SyntheticSpec spec = default_synthetic_spec();
  spec.speakers = 5;
  spec.segments_per_speaker = 2;
  spec.debates = 3;
  spec.cue_rate = 0.4;
  auto debates = generate_synthetic_corpus(spec, 21);

  auto dir = make_temp_dir("roundtrip");
  write_corpus(debates, dir);
  auto parsed = parse_corpus(dir);
  REQUIRE(parsed.size() == debates.size());
  for (std::size_t d = 0; d < debates.size(); ++d) {
    REQUIRE(parsed[d].segments.size() == debates[d].segments.size());
    for (std::size_t i = 0; i < debates[d].segments.size(); ++i) {
      CHECK(parsed[d].segments[i].tokens == debates[d].segments[i].tokens);
      CHECK(parsed[d].segments[i].vote == debates[d].segments[i].vote);
      CHECK(parsed[d].segments[i].speaker_id == debates[d].segments[i].speaker_id);
    }
    CHECK(parsed[d].speaker_names == debates[d].speaker_names);
  }
  std::filesystem::remove_all(dir);
}
