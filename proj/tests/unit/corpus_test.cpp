#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "biasscope/corpus.hpp"
#include "biasscope/error.hpp"
#include "biasscope/hashing.hpp"
#include "support.hpp"

using namespace biasscope;
using biasscope::testing::TempDir;
using biasscope::testing::write_text;

namespace {

SourceMeta meta() {
  SourceMeta m;
  m.source_name = "unit";
  m.rigor = RigorLevel::High;
  return m;
}

Errc error_of(const std::function<void()>& fn, std::size_t* line = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (line) *line = e.line();
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Io;
}

}  // namespace

TEST(Corpus, IngestNormalizesAndHashes) {
  const auto doc = ingest_document("line one\r\nline two\r", meta());
  EXPECT_EQ(doc.text, "line one\nline two\n");
  EXPECT_EQ(doc.doc_id, sha256_hex("line one\nline two\n"));
  EXPECT_EQ(doc.doc_id.size(), 64u);
}

TEST(Corpus, SameTextSameId) {
  EXPECT_EQ(ingest_document("a\r\nb", meta()).doc_id, ingest_document("a\nb", meta()).doc_id);
}

TEST(Corpus, IngestRejectsEmptyAndInvalid) {
  EXPECT_EQ(error_of([] { (void)ingest_document("", meta()); }), Errc::EmptyDocument);
  EXPECT_EQ(error_of([] { (void)ingest_document(" \n\t ", meta()); }), Errc::EmptyDocument);
  EXPECT_EQ(error_of([] { (void)ingest_document("bad \xff byte", meta()); }), Errc::InvalidEncoding);
}

TEST(Corpus, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Corpus, LoadCorpusReadsLabelsAndMeta) {
  TempDir dir;
  write_text(dir / "c.jsonl",
             R"({"text":"one","source_name":"s","rigor":"low","url":"http://x","labels":{"straw-man":"present"}})"
             "\n\n"
             R"({"text":"two","source_name":"s","rigor":"medium","topic":"t","stance":"pro"})"
             "\n");
  const auto docs = load_corpus(dir / "c.jsonl");
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].meta.url, "http://x");
  ASSERT_TRUE(docs[0].ground_truth);
  EXPECT_EQ(docs[0].ground_truth->label_for(BiasType::StrawMan), Verdict::Present);
  EXPECT_FALSE(docs[0].ground_truth->label_for(BiasType::MirrorImaging));
  EXPECT_FALSE(docs[1].ground_truth);
  EXPECT_EQ(docs[1].meta.rigor, RigorLevel::Medium);
}

TEST(Corpus, LoadCorpusErrorsCarryLines) {
  TempDir dir;
  const std::string good = R"({"text":"one","source_name":"s","rigor":"low"})";
  std::size_t line = 0;

  write_text(dir / "a.jsonl", good + "\n{not json\n");
  EXPECT_EQ(error_of([&] { (void)load_corpus(dir / "a.jsonl"); }, &line), Errc::Malformed);
  EXPECT_EQ(line, 2u);

  write_text(dir / "b.jsonl", good + "\n" + good + "\n");
  EXPECT_EQ(error_of([&] { (void)load_corpus(dir / "b.jsonl"); }, &line), Errc::DuplicateDocument);
  EXPECT_EQ(line, 2u);

  write_text(dir / "c.jsonl", R"({"text":"one","source_name":"s","rigor":"extreme"})"
                              "\n");
  EXPECT_EQ(error_of([&] { (void)load_corpus(dir / "c.jsonl"); }), Errc::Malformed);

  write_text(dir / "d.jsonl", R"({"text":"one","source_name":"s","rigor":"low","labels":{"anchoring":"present"}})"
                              "\n");
  EXPECT_EQ(error_of([&] { (void)load_corpus(dir / "d.jsonl"); }), Errc::Malformed);

  EXPECT_EQ(error_of([&] { (void)load_corpus(dir / "missing.jsonl"); }), Errc::Io);
}

TEST(Corpus, UnknownKeysNeedLenientMode) {
  TempDir dir;
  write_text(dir / "c.jsonl", R"({"text":"one","source_name":"s","rigor":"low","extra":1})"
                              "\n");
  EXPECT_EQ(error_of([&] { (void)load_corpus(dir / "c.jsonl"); }), Errc::Malformed);
  EXPECT_EQ(load_corpus(dir / "c.jsonl", CorpusOptions{true}).size(), 1u);
}

TEST(Corpus, AppendRoundTripsAndRefusesDuplicates) {
  TempDir dir;
  GroundTruth truth;
  truth.labels[BiasType::FalseCausality] = Verdict::Unclear;
  const auto a = ingest_document("alpha", meta(), truth);
  const auto b = ingest_document("beta", meta());
  append_to_corpus(dir / "c.jsonl", {a});
  append_to_corpus(dir / "c.jsonl", {b});
  const auto docs = load_corpus(dir / "c.jsonl");
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].doc_id, a.doc_id);
  EXPECT_EQ(docs[0].ground_truth->label_for(BiasType::FalseCausality), Verdict::Unclear);
  EXPECT_EQ(error_of([&] { append_to_corpus(dir / "c.jsonl", {a}); }), Errc::DuplicateDocument);
  EXPECT_EQ(load_corpus(dir / "c.jsonl").size(), 2u);
}
