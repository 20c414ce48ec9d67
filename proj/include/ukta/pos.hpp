#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ukta {

// Closed inventory of morpheme tags (Sejong-style tag set).
enum class PosTag : std::uint8_t {
  NNG, NNP, NNB, NP, NR,
  VV, VA, VX, VCP, VCN,
  MMA, MMD, MMN, MAG, MAJ,
  IC,
  JKS, JKC, JKG, JKO, JKB, JKV, JKQ, JX, JC,
  EP, EF, EC, ETN, ETM,
  XPN, XSN, XSV, XSA, XR,
  SF, SP, SS, SE, SO, SW, SL, SH, SN,
};

inline constexpr std::size_t kTagCount = 44;

inline constexpr std::array<std::string_view, kTagCount> kTagCodes = {
    "NNG", "NNP", "NNB", "NP",  "NR",  "VV",  "VA",  "VX",  "VCP",
    "VCN", "MMA", "MMD", "MMN", "MAG", "MAJ", "IC",  "JKS", "JKC",
    "JKG", "JKO", "JKB", "JKV", "JKQ", "JX",  "JC",  "EP",  "EF",
    "EC",  "ETN", "ETM", "XPN", "XSN", "XSV", "XSA", "XR",  "SF",
    "SP",  "SS",  "SE",  "SO",  "SW",  "SL",  "SH",  "SN",
};

enum class MajorClass : std::uint8_t {
  Noun, Verb, Modifier, Interjection, Josa, Ending, Affix, Sign,
};

inline constexpr std::array<MajorClass, 8> kMajorClasses = {
    MajorClass::Noun,  MajorClass::Verb,   MajorClass::Modifier,
    MajorClass::Interjection, MajorClass::Josa, MajorClass::Ending,
    MajorClass::Affix, MajorClass::Sign,
};

inline std::string_view to_string(PosTag tag) {
  return kTagCodes[static_cast<std::size_t>(tag)];
}

inline std::optional<PosTag> parse_tag(std::string_view code) {
  for (std::size_t i = 0; i < kTagCount; ++i)
    if (kTagCodes[i] == code) return static_cast<PosTag>(i);
  return std::nullopt;
}

inline std::string_view to_string(MajorClass c) {
  switch (c) {
    case MajorClass::Noun: return "Noun";
    case MajorClass::Verb: return "Verb";
    case MajorClass::Modifier: return "Modifier";
    case MajorClass::Interjection: return "Interjection";
    case MajorClass::Josa: return "Josa";
    case MajorClass::Ending: return "Ending";
    case MajorClass::Affix: return "Affix";
    case MajorClass::Sign: return "Sign";
  }
  return "?";
}

// Major class is decided by the first letter of the tag code.
inline MajorClass pos_category(PosTag tag) {
  switch (to_string(tag).front()) {
    case 'N': return MajorClass::Noun;
    case 'V': return MajorClass::Verb;
    case 'M': return MajorClass::Modifier;
    case 'I': return MajorClass::Interjection;
    case 'J': return MajorClass::Josa;
    case 'E': return MajorClass::Ending;
    case 'X': return MajorClass::Affix;
    default: return MajorClass::Sign;
  }
}

// A set of tags, used as the filter for per-class features.
class TagSet {
 public:
  constexpr TagSet() = default;
  TagSet(std::initializer_list<PosTag> tags) {
    for (auto t : tags) bits_.set(static_cast<std::size_t>(t));
  }

  static TagSet all() {
    TagSet s;
    s.bits_.set();
    return s;
  }
  static TagSet of(MajorClass c) {
    TagSet s;
    for (std::size_t i = 0; i < kTagCount; ++i)
      if (pos_category(static_cast<PosTag>(i)) == c) s.bits_.set(i);
    return s;
  }
  // Tags whose code starts with `prefix`.
  static TagSet prefixed(std::string_view prefix) {
    TagSet s;
    for (std::size_t i = 0; i < kTagCount; ++i)
      if (kTagCodes[i].substr(0, prefix.size()) == prefix) s.bits_.set(i);
    return s;
  }

  bool contains(PosTag t) const { return bits_.test(static_cast<std::size_t>(t)); }
  std::size_t size() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }

  TagSet operator|(const TagSet& o) const {
    TagSet s;
    s.bits_ = bits_ | o.bits_;
    return s;
  }
  TagSet operator&(const TagSet& o) const {
    TagSet s;
    s.bits_ = bits_ & o.bits_;
    return s;
  }
  bool operator==(const TagSet&) const = default;

 private:
  std::bitset<kTagCount> bits_;
};

namespace tagclass {

// Content lemmas: open-class, meaning-bearing morphemes.
inline TagSet content() {
  return TagSet::of(MajorClass::Noun) | TagSet::of(MajorClass::Verb) |
         TagSet::of(MajorClass::Modifier) | TagSet{PosTag::IC, PosTag::XR};
}

// Function lemmas: particles, endings and non-root affixes.
inline TagSet function() {
  return TagSet::of(MajorClass::Josa) | TagSet::of(MajorClass::Ending) |
         TagSet{PosTag::XPN, PosTag::XSN, PosTag::XSV, PosTag::XSA};
}

inline TagSet lexical() { return content() | function(); }

struct Named {
  std::string_view name;
  TagSet tags;
};

// Every class name accepted as a `pos_filter` in a registry.
inline const std::vector<Named>& named_classes() {
  static const std::vector<Named> classes = [] {
    std::vector<Named> v;
    for (std::size_t i = 0; i < kTagCount; ++i)
      v.push_back({kTagCodes[i], TagSet{static_cast<PosTag>(i)}});
    v.push_back({"ALL", TagSet::all()});
    v.push_back({"LEX", lexical()});
    v.push_back({"CL", content()});
    v.push_back({"FL", function()});
    v.push_back({"NN", TagSet::of(MajorClass::Noun)});
    v.push_back({"V", TagSet::of(MajorClass::Verb)});
    v.push_back({"VC", TagSet{PosTag::VCP, PosTag::VCN}});
    v.push_back({"M", TagSet::of(MajorClass::Modifier)});
    v.push_back({"MM", TagSet::prefixed("MM")});
    v.push_back({"MA", TagSet::prefixed("MA")});
    v.push_back({"J", TagSet::of(MajorClass::Josa)});
    v.push_back({"JK", TagSet::prefixed("JK")});
    v.push_back({"E", TagSet::of(MajorClass::Ending)});
    v.push_back({"ET", TagSet::prefixed("ET")});
    v.push_back({"X", TagSet{PosTag::XPN, PosTag::XSN, PosTag::XSV, PosTag::XSA}});
    v.push_back({"XS", TagSet::prefixed("XS")});
    v.push_back({"S", TagSet::of(MajorClass::Sign)});
    return v;
  }();
  return classes;
}

inline std::optional<TagSet> lookup(std::string_view name) {
  for (const auto& c : named_classes())
    if (c.name == name) return c.tags;
  return std::nullopt;
}

}  // namespace tagclass

}  // namespace ukta
