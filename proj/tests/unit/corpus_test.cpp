#include <sstream>

#include "doctest.h"
#include "genforge/corpus.hpp"
#include "genforge/error.hpp"
#include "test_support.hpp"

using namespace genforge;

TEST_CASE("jsonl examples accept string and list targets") {
  std::istringstream in(
      "{\"id\": 1, \"source\": \"a b\", \"target\": \"c\"}\n"
      "\n"
      "{\"id\": \"x\", \"source\": \"d\", \"target\": [\"e\", \"f\"], \"extra\": 3}\n");
  const auto ex = read_jsonl_examples(in);
  REQUIRE(ex.size() == 2);
  CHECK(ex[0] == Example{"1", "a b", {"c"}});
  CHECK(ex[1] == Example{"x", "d", {"e", "f"}});
}

TEST_CASE("jsonl parse errors carry the line number") {
  std::istringstream in("{\"id\": 1, \"source\": \"a\", \"target\": \"b\"}\n{oops\n");
  try {
    read_jsonl_examples(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream missing("{\"id\": 1, \"target\": \"b\"}\n");
  CHECK_THROWS_AS(read_jsonl_examples(missing), ParseError);
  std::istringstream empty_targets("{\"id\": 1, \"source\": \"a\", \"target\": []}\n");
  CHECK_THROWS_AS(read_jsonl_examples(empty_targets), ParseError);
  std::istringstream nothing("\n\n");
  CHECK_THROWS_AS(read_jsonl_examples(nothing), EmptyDatasetError);
}

TEST_CASE("tsv examples use line numbers as ids") {
  std::istringstream in("src one\tref one\nsrc two\tref a\tref b\n");
  const auto ex = read_tsv_examples(in);
  REQUIRE(ex.size() == 2);
  CHECK(ex[0].id == "1");
  CHECK(ex[1].references == std::vector<std::string>{"ref a", "ref b"});
  std::istringstream bad("no tab here\n");
  CHECK_THROWS_AS(read_tsv_examples(bad), ParseError);
}

TEST_CASE("validate_examples rejects duplicates, empty references and bad utf-8") {
  std::vector<Example> dup = {{"a", "s", {"t"}}, {"a", "s", {"t"}}};
  CHECK_THROWS_AS(validate_examples(dup), ValidationError);
  std::vector<Example> no_ref = {{"a", "s", {}}};
  CHECK_THROWS_AS(validate_examples(no_ref), ValidationError);
  std::vector<Example> bad_utf8 = {{"a", std::string("\xff\xfe"), {"t"}}};
  CHECK_THROWS_AS(validate_examples(bad_utf8), ValidationError);
  std::vector<Example> ok = {{"a", "s", {"t"}}, {"b", "s", {"t"}}};
  CHECK_NOTHROW(validate_examples(ok));
}

TEST_CASE("utf-8 validation") {
  CHECK(is_valid_utf8("plain"));
  CHECK(is_valid_utf8("caf\xc3\xa9"));
  CHECK(is_valid_utf8("\xe2\x82\xac"));
  CHECK_FALSE(is_valid_utf8("\xc3"));
  CHECK_FALSE(is_valid_utf8("\xc0\xaf"));
  CHECK_FALSE(is_valid_utf8("\xed\xa0\x80"));
}

TEST_CASE("dataset save and load round trip") {
  testing::TempDir dir;
  Dataset ds;
  ds.name = "toy";
  ds.splits["train"] = {{"1", "the cat sat", {"a cat sat"}}, {"2", "dog ran", {"the dog", "a dog"}}};
  ds.splits["test"] = {{"t1", "cat \"quoted\"", {"cat"}}};
  save_dataset(ds, dir.path());
  CHECK(std::filesystem::exists(dir / "toy.train.jsonl"));
  const Dataset back = load_dataset(dir.path());
  CHECK(back == ds);

  const Dataset single = load_dataset(dir / "toy.test.jsonl");
  CHECK(single.splits.count("test") == 1);
  CHECK(single.split("test") == ds.splits["test"]);
  CHECK_THROWS_AS(single.split("valid"), ArgumentError);
}

TEST_CASE("load_dataset errors") {
  testing::TempDir dir;
  CHECK_THROWS_AS(load_dataset(dir / "missing.jsonl"), Error);
  CHECK_THROWS_AS(load_dataset(dir.path()), EmptyDatasetError);
  testing::write_file(dir / "d.test.jsonl",
                      "{\"id\": 1, \"source\": \"a\", \"target\": \"b\"}\n"
                      "{\"id\": 1, \"source\": \"c\", \"target\": \"d\"}\n");
  CHECK_THROWS_AS(load_dataset(dir / "d.test.jsonl"), ValidationError);
}

TEST_CASE("predictions") {
  std::istringstream in("{\"id\": \"a\", \"hypothesis\": \"x y\", \"score\": -1}\n"
                        "{\"id\": 2, \"hypothesis\": \"\"}\n");
  const auto p = read_predictions(in);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == Prediction{"a", "x y"});
  CHECK(p[1] == Prediction{"2", ""});
  std::istringstream dup("{\"id\": \"a\", \"hypothesis\": \"x\"}\n{\"id\": \"a\", \"hypothesis\": \"y\"}\n");
  CHECK_THROWS_AS(read_predictions(dup), ValidationError);
  std::istringstream none("");
  CHECK_THROWS_AS(read_predictions(none), EmptyDatasetError);
  std::istringstream no_hyp("{\"id\": \"a\"}\n");
  CHECK_THROWS_AS(read_predictions(no_hyp), ParseError);
}

TEST_CASE("tokenizer modes") {
  CHECK(tokenize("Hello, World!") == TokenSeq{"hello", ",", "world", "!"});
  TokenizerSpec keep;
  keep.lowercase = false;
  CHECK(tokenize("Hello, World!", keep) == TokenSeq{"Hello", ",", "World", "!"});
  TokenizerSpec strip;
  strip.strip_punctuation = true;
  CHECK(tokenize("Hello, World!", strip) == TokenSeq{"hello", "world"});
  TokenizerSpec ws;
  ws.mode = TokenizerMode::whitespace;
  CHECK(tokenize("  Hello,  World! ", ws) == TokenSeq{"hello,", "world!"});
  TokenizerSpec chars;
  chars.mode = TokenizerMode::character;
  CHECK(tokenize("ab c\xc3\xa9", chars) == TokenSeq{"a", "b", "c", "\xc3\xa9"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   ").empty());
}

TEST_CASE("tokenizer is total on invalid utf-8") {
  const TokenSeq t = tokenize(std::string("a\xff" "b"));
  CHECK_FALSE(t.empty());
  for (const auto& tok : t) CHECK(is_valid_utf8(tok));
}

TEST_CASE("tokenizer mode names") {
  CHECK(parse_tokenizer_mode("whitespace") == TokenizerMode::whitespace);
  CHECK(parse_tokenizer_mode("unicode") == TokenizerMode::unicode_word_punct);
  CHECK(parse_tokenizer_mode("character") == TokenizerMode::character);
  CHECK_THROWS_AS(parse_tokenizer_mode("bpe"), Error);
  for (auto m : {TokenizerMode::whitespace, TokenizerMode::unicode_word_punct,
                 TokenizerMode::character})
    CHECK(parse_tokenizer_mode(to_string(m)) == m);
}

TEST_CASE("ngram counts") {
  const TokenSeq t = {"a", "b", "a", "b", "a"};
  const NGramCounts c = ngrams(t, 2);
  CHECK(c.total() == 4);
  CHECK(c.size() == 2);
  CHECK(c.count(TokenSeq{"a", "b"}) == 2);
  CHECK(c.count(TokenSeq{"b", "a"}) == 2);
  CHECK(c.count(TokenSeq{"a", "a"}) == 0);
  CHECK(ngrams(t, 6).empty());
  CHECK_THROWS_AS(ngrams(t, 0), ArgumentError);
  const auto items = c.items();
  REQUIRE(items.size() == 2);
  CHECK(items[0].first == TokenSeq{"a", "b"});
}

TEST_CASE("ngram keys do not collide across token boundaries") {
  const TokenSeq x = {"ab", "c"};
  const TokenSeq y = {"a", "bc"};
  CHECK(NGramCounts::encode(x) != NGramCounts::encode(y));
  const TokenSeq z = {std::string("a\0b", 3), "c"};
  CHECK(NGramCounts::encode(z) != NGramCounts::encode(x));
}
