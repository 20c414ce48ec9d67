#include <random>
#include <set>

#include <gtest/gtest.h>

#include "support.hpp"
#include "ukta/pos.hpp"
#include "ukta/pretagged.hpp"

namespace ukta {
namespace {

using testing::appendix_correct;
using testing::data_path;
using testing::read_file;

ErrorCode error_of(std::string_view doc, TextFormat fmt) {
  try {
    parse_pretagged(doc, fmt);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for: " << doc;
  return ErrorCode::Io;
}

TEST(PosTag, InventoryIsClosedAndRoundTrips) {
  std::set<std::string_view> codes(kTagCodes.begin(), kTagCodes.end());
  EXPECT_EQ(codes.size(), kTagCount);
  for (std::size_t i = 0; i < kTagCount; ++i) {
    auto tag = static_cast<PosTag>(i);
    EXPECT_EQ(parse_tag(to_string(tag)), tag);
  }
  EXPECT_FALSE(parse_tag("ZZZ"));
  EXPECT_FALSE(parse_tag("nng"));
  EXPECT_FALSE(parse_tag(""));
}

TEST(PosTag, CategoryFollowsPrefix) {
  EXPECT_EQ(pos_category(PosTag::NNG), MajorClass::Noun);
  EXPECT_EQ(pos_category(PosTag::JX), MajorClass::Josa);
  EXPECT_EQ(pos_category(PosTag::SN), MajorClass::Sign);
  EXPECT_EQ(pos_category(PosTag::NP), MajorClass::Noun);
  EXPECT_EQ(pos_category(PosTag::ETM), MajorClass::Ending);
  EXPECT_EQ(pos_category(PosTag::XR), MajorClass::Affix);
  EXPECT_EQ(pos_category(PosTag::IC), MajorClass::Interjection);
  EXPECT_EQ(pos_category(PosTag::MAJ), MajorClass::Modifier);
  EXPECT_EQ(pos_category(PosTag::VCN), MajorClass::Verb);

  std::size_t total = 0;
  for (auto c : kMajorClasses) total += TagSet::of(c).size();
  EXPECT_EQ(total, kTagCount);
}

TEST(PosTag, ContentAndFunctionAreDisjointAndExcludeSigns) {
  const auto cl = tagclass::content(), fl = tagclass::function();
  EXPECT_TRUE((cl & fl).empty());
  EXPECT_TRUE((cl & TagSet::of(MajorClass::Sign)).empty());
  EXPECT_TRUE((fl & TagSet::of(MajorClass::Sign)).empty());
  EXPECT_EQ((cl | fl | TagSet::of(MajorClass::Sign)), TagSet::all());
  EXPECT_TRUE(cl.contains(PosTag::XR));
  EXPECT_TRUE(fl.contains(PosTag::XSV));
}

TEST(Pretagged, ParsesAppendixRecord) {
  auto e = parse_pretagged("나는\t나/NP+는/JX\n", TextFormat::Tsv);
  ASSERT_EQ(e.paragraphs.size(), 1u);
  const auto& wp = e.paragraphs[0].sentences[0].wordpieces[0];
  EXPECT_EQ(wp.raw, "나는");
  ASSERT_EQ(wp.morphemes.size(), 2u);
  EXPECT_EQ(wp.morphemes[0], (Morpheme{"나", "나", PosTag::NP}));
  EXPECT_EQ(wp.morphemes[1], (Morpheme{"는", "는", PosTag::JX}));
}

TEST(Pretagged, AppendixFixtureShape) {
  auto e = appendix_correct();
  EXPECT_EQ(e.sentence_count(), 1u);
  EXPECT_EQ(e.paragraphs[0].sentences[0].wordpieces.size(), 5u);
  EXPECT_EQ(e.morpheme_count(), 11u);
  auto bad = testing::appendix_erroneous();
  EXPECT_EQ(bad.morpheme_count(), 11u);

  auto tsv = serialize(e, TextFormat::Tsv);
  EXPECT_EQ(tsv, read_file(data_path("appendix_correct.tsv")));
  std::size_t records = 0, plus = 0;
  for (char c : tsv) {
    records += c == '\n';
    plus += c == '+';
  }
  EXPECT_EQ(records, 5u);
  EXPECT_EQ(records + plus, 11u);
}

TEST(Pretagged, CanonicalizesFixture) {
  const auto doc = read_file(data_path("appendix_noncanonical.tsv"));
  EXPECT_EQ(canonicalize(doc, TextFormat::Tsv), read_file(data_path("appendix_canonical.tsv")));
  auto canon = read_file(data_path("appendix_canonical.tsv"));
  EXPECT_EQ(canonicalize(canon, TextFormat::Tsv), canon);
}

TEST(Pretagged, SingleRecord) {
  auto e = parse_pretagged("해\t해/NNG\n", TextFormat::Tsv);
  EXPECT_EQ(serialize(e, TextFormat::Tsv), "해\t해/NNG\n");
}

TEST(Pretagged, JsonFixtureKeepsSurfaceAndDefaultsLemma) {
  auto e = parse_pretagged(read_file(data_path("appendix_correct.json")), TextFormat::Json);
  EXPECT_EQ(e.id, "appendix");
  EXPECT_EQ(e.morpheme_count(), 11u);
  const auto& wps = e.paragraphs[0].sentences[0].wordpieces;
  EXPECT_EQ(wps[2].morphemes[0].surface, "나");
  EXPECT_EQ(wps[2].morphemes[0].lemma, "날");
  EXPECT_EQ(wps[0].morphemes[0].lemma, "나");
  // Lemma view of the JSON fixture equals the TSV fixture.
  auto tsv = serialize(e, TextFormat::Tsv);
  EXPECT_EQ(tsv, read_file(data_path("appendix_canonical.tsv")));
}

TEST(Pretagged, SentenceAndParagraphBoundaries) {
  auto e = parse_pretagged("a\ta/SL\n\nb\tb/SL\n\n\nc\tc/SL\n\n\n\n\nd\td/SL\n", TextFormat::Tsv);
  ASSERT_EQ(e.paragraphs.size(), 3u);
  EXPECT_EQ(e.paragraphs[0].sentences.size(), 2u);
  EXPECT_EQ(e.paragraphs[1].sentences.size(), 1u);
  EXPECT_EQ(e.paragraphs[2].sentences[0].index, 3u);
  EXPECT_EQ(e.paragraphs[2].ordinal, 2u);
}

TEST(Pretagged, SignLemmasContainingSeparators) {
  auto e = parse_pretagged("a/b\ta/SL+//SP+b/SL++/SW\n", TextFormat::Tsv);
  const auto& m = e.paragraphs[0].sentences[0].wordpieces[0].morphemes;
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m[1].lemma, "/");
  EXPECT_EQ(m[1].tag, PosTag::SP);
  EXPECT_EQ(m[3].lemma, "+");
  EXPECT_EQ(serialize(e, TextFormat::Tsv), "a/b\ta/SL+//SP+b/SL++/SW\n");
}

TEST(Pretagged, Errors) {
  EXPECT_EQ(error_of("", TextFormat::Tsv), ErrorCode::EmptySentence);
  EXPECT_EQ(error_of("\n\n  \n", TextFormat::Tsv), ErrorCode::EmptySentence);
  EXPECT_EQ(error_of("#id\tx\n", TextFormat::Tsv), ErrorCode::EmptySentence);
  EXPECT_EQ(error_of("", TextFormat::Json), ErrorCode::EmptySentence);
  EXPECT_EQ(error_of("나는\t나/NP+는/ZZZ\n", TextFormat::Tsv), ErrorCode::UnknownTag);
  EXPECT_EQ(error_of("나는 나/NP\n", TextFormat::Tsv), ErrorCode::MalformedRecord);
  EXPECT_EQ(error_of("나는\t나\n", TextFormat::Tsv), ErrorCode::MalformedRecord);
  EXPECT_EQ(error_of("나는\t나/NP+\n", TextFormat::Tsv), ErrorCode::MalformedRecord);
  EXPECT_EQ(error_of("{\"paragraphs\": [{\"sentences\": [{\"wordpieces\": []}]}]}",
                     TextFormat::Json),
            ErrorCode::EmptySentence);
  EXPECT_EQ(error_of("{\"paragraphs\": [", TextFormat::Json), ErrorCode::MalformedRecord);
  EXPECT_EQ(error_of("{\"paragraphs\": [{\"sentences\": [{\"wordpieces\": [{\"raw\": \"a\", "
                     "\"morphemes\": [{\"surface\": \"a\", \"tag\": \"QQ\"}]}]}]}]}",
                     TextFormat::Json),
            ErrorCode::UnknownTag);
}

TEST(Pretagged, ErrorsNameTheLine) {
  try {
    parse_pretagged("a\ta/SL\nb\tb/SL\n\nc\tc/XYZ\n", TextFormat::Tsv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownTag);
    EXPECT_EQ(e.location(), "line 4");
    EXPECT_NE(std::string(e.what()).find("XYZ"), std::string::npos);
  }
  try {
    parse_pretagged("{\"paragraphs\": [{\"sentences\": []}]}", TextFormat::Json);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySentence);
    EXPECT_EQ(e.location(), "sentence 0");
  }
}

TEST(Pretagged, FuzzedTagsAlwaysRaiseUnknownTag) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> letter('A', 'Z');
  std::uniform_int_distribution<int> len(1, 4);
  int checked = 0;
  while (checked < 500) {
    std::string code;
    for (int i = len(rng); i > 0; --i) code += static_cast<char>(letter(rng));
    if (parse_tag(code)) continue;
    ++checked;
    EXPECT_EQ(error_of("x\tx/" + code + "\n", TextFormat::Tsv), ErrorCode::UnknownTag) << code;
  }
}

TEST(Pretagged, HeadersAndLabelsRoundTrip) {
  const std::string doc =
      "#id\te1\n#topic\tmy hero\n#grade\t5\n"
      "#label\tGrammar\t2\n#label\tVocabulary\t3\n#label\tSentence Expression\t1\n"
      "#label\tInter-paragraph Structure\t2\n#label\tIn-paragraph Structure\t3\n"
      "#label\tStructure Consistency\t2\n#label\tLength\t3\n#label\tTopic Clarity\t2\n"
      "#label\tOriginality\t2\n#label\tNarrative\t0\n"
      "#\t#/SW\n";
  auto e = parse_pretagged(doc, TextFormat::Tsv);
  EXPECT_EQ(e.meta.topic, "my hero");
  ASSERT_TRUE(e.labels);
  EXPECT_EQ((*e.labels)[1], 3);
  EXPECT_EQ((*e.labels)[9], 0);
  EXPECT_EQ(e.paragraphs[0].sentences[0].wordpieces[0].raw, "#");
  EXPECT_EQ(serialize(e, TextFormat::Tsv), doc);
}

TEST(Pretagged, RandomRoundTripBothFormats) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    auto e = testing::random_essay(rng, /*lemma_only=*/false);
    EXPECT_EQ(parse_pretagged(serialize(e, TextFormat::Json), TextFormat::Json), e);
    auto lemma_only = testing::random_essay(rng, /*lemma_only=*/true);
    auto tsv = serialize(lemma_only, TextFormat::Tsv);
    EXPECT_EQ(parse_pretagged(tsv, TextFormat::Tsv), lemma_only) << tsv;
    EXPECT_EQ(serialize(parse_pretagged(tsv, TextFormat::Tsv), TextFormat::Tsv), tsv);
  }
}

}  // namespace
}  // namespace ukta
