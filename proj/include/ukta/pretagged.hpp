#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ukta/error.hpp"
#include "ukta/pos.hpp"
#include "ukta/text.hpp"

namespace ukta {

using Json = nlohmann::ordered_json;

enum class TextFormat { Json, Tsv };

namespace detail {

inline bool has_space(std::string_view s) {
  for (unsigned char c : s)
    if (std::isspace(c)) return true;
  return false;
}

inline std::string line_loc(std::size_t line) { return "line " + std::to_string(line); }

inline std::vector<std::string_view> split_lines(std::string_view doc) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= doc.size()) {
    auto nl = doc.find('\n', start);
    auto end = nl == std::string_view::npos ? doc.size() : nl;
    auto line = doc.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

inline bool is_blank(std::string_view s) {
  for (unsigned char c : s)
    if (!std::isspace(c)) return false;
  return true;
}

// Parses `lemma/TAG(+lemma/TAG)*`. A lemma may itself contain '/' or '+'
// (sign morphemes): an item ends at the first '/' that is followed by an
// upper-case code running up to '+' or the end of the field.
inline std::vector<Morpheme> parse_analysis(std::string_view field, std::size_t line) {
  std::vector<Morpheme> out;
  std::size_t i = 0;
  while (i < field.size()) {
    std::size_t slash = std::string_view::npos, code_end = 0;
    for (std::size_t j = i + 1; j < field.size(); ++j) {
      if (field[j] != '/') continue;
      std::size_t k = j + 1;
      while (k < field.size() && std::isupper(static_cast<unsigned char>(field[k]))) ++k;
      if (k > j + 1 && (k == field.size() || field[k] == '+')) {
        slash = j;
        code_end = k;
        break;
      }
    }
    if (slash == std::string_view::npos)
      throw Error(ErrorCode::MalformedRecord,
                  "expected lemma/TAG in '" + std::string(field.substr(i)) + "'",
                  line_loc(line));
    auto code = field.substr(slash + 1, code_end - slash - 1);
    auto tag = parse_tag(code);
    if (!tag)
      throw Error(ErrorCode::UnknownTag, "unknown tag '" + std::string(code) + "'",
                  line_loc(line));
    std::string lemma(field.substr(i, slash - i));
    out.push_back({lemma, lemma, *tag});
    i = code_end;
    if (i < field.size()) {
      ++i;  // '+'
      if (i == field.size())
        throw Error(ErrorCode::MalformedRecord, "dangling '+'", line_loc(line));
    }
  }
  if (out.empty())
    throw Error(ErrorCode::MalformedRecord, "empty morpheme analysis", line_loc(line));
  return out;
}

inline void validate(const Essay& e) {
  if (e.paragraphs.empty())
    throw Error(ErrorCode::EmptySentence, "essay has no sentences", "sentence 0");
  std::size_t index = 0;
  for (const auto& p : e.paragraphs) {
    if (p.sentences.empty())
      throw Error(ErrorCode::EmptySentence, "paragraph without sentences",
                  "sentence " + std::to_string(index));
    for (const auto& s : p.sentences) {
      if (s.wordpieces.empty())
        throw Error(ErrorCode::EmptySentence, "sentence without wordpieces",
                    "sentence " + std::to_string(index));
      if (s.index != index)
        throw Error(ErrorCode::MalformedRecord, "sentence indices not contiguous",
                    "sentence " + std::to_string(index));
      for (const auto& w : s.wordpieces) {
        if (w.raw.empty() || has_space(w.raw) || w.morphemes.empty())
          throw Error(ErrorCode::MalformedRecord, "invalid wordpiece '" + w.raw + "'",
                      "sentence " + std::to_string(index));
        for (const auto& m : w.morphemes)
          if (m.surface.empty() || m.lemma.empty() || has_space(m.surface) ||
              has_space(m.lemma))
            throw Error(ErrorCode::MalformedRecord,
                        "invalid morpheme in wordpiece '" + w.raw + "'",
                        "sentence " + std::to_string(index));
      }
      ++index;
    }
  }
}

inline Essay parse_tsv(std::string_view doc) {
  Essay essay;
  auto lines = split_lines(doc);
  std::size_t ln = 0;

  std::vector<std::pair<std::string, int>> labels;
  for (; ln < lines.size(); ++ln) {
    auto line = lines[ln];
    if (is_blank(line)) continue;
    if (line.front() != '#') break;
    auto tab = line.find('\t');
    auto key = line.substr(1, tab == std::string_view::npos ? line.npos : tab - 1);
    // A '#' wordpiece is a record, not a header.
    if (key != "id" && key != "topic" && key != "grade" && key != "label") break;
    if (tab == std::string_view::npos)
      throw Error(ErrorCode::MalformedRecord, "header without value", line_loc(ln + 1));
    std::string value(line.substr(tab + 1));
    if (key == "id") {
      essay.id = value;
    } else if (key == "topic") {
      essay.meta.topic = value;
    } else if (key == "grade") {
      essay.meta.grade = value;
    } else if (key == "label") {
      auto tab2 = value.find('\t');
      if (tab2 == std::string::npos)
        throw Error(ErrorCode::MalformedRecord, "label needs name and score",
                    line_loc(ln + 1));
      int score = 0;
      try {
        score = std::stoi(value.substr(tab2 + 1));
      } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedRecord, "label score is not an integer",
                    line_loc(ln + 1));
      }
      labels.emplace_back(value.substr(0, tab2), score);
    }
  }

  if (!labels.empty()) {
    RubricScores scores{};
    std::array<bool, kRubricCount> seen{};
    for (const auto& [name, score] : labels) {
      auto idx = rubric_index(name);
      if (!idx || seen[*idx] || score < 0 || score > kMaxRubricScore)
        throw Error(ErrorCode::MalformedRecord, "bad label '" + name + "'", "header");
      seen[*idx] = true;
      scores[*idx] = score;
    }
    if (labels.size() != kRubricCount)
      throw Error(ErrorCode::MalformedRecord, "labels must cover all 10 rubrics", "header");
    essay.labels = scores;
  }

  Paragraph para;
  Sentence sent;
  std::size_t blank_run = 0;
  auto close_sentence = [&] {
    if (!sent.wordpieces.empty()) para.sentences.push_back(std::move(sent));
    sent = Sentence{};
  };
  auto close_paragraph = [&] {
    close_sentence();
    if (!para.sentences.empty()) essay.paragraphs.push_back(std::move(para));
    para = Paragraph{};
  };

  for (; ln < lines.size(); ++ln) {
    auto line = lines[ln];
    if (is_blank(line)) {
      ++blank_run;
      continue;
    }
    if (!sent.wordpieces.empty() || !para.sentences.empty()) {
      if (blank_run >= 2)
        close_paragraph();
      else if (blank_run == 1)
        close_sentence();
    }
    blank_run = 0;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size())
      throw Error(ErrorCode::MalformedRecord, "expected raw<TAB>analysis", line_loc(ln + 1));
    auto raw = line.substr(0, tab);
    auto analysis = line.substr(tab + 1);
    while (!analysis.empty() && (analysis.back() == ' ' || analysis.back() == '\t'))
      analysis.remove_suffix(1);
    if (has_space(raw) || has_space(analysis))
      throw Error(ErrorCode::MalformedRecord, "whitespace inside a record", line_loc(ln + 1));
    sent.wordpieces.push_back({std::string(raw), parse_analysis(analysis, ln + 1)});
  }
  close_paragraph();

  essay.renumber();
  validate(essay);
  return essay;
}

inline std::string serialize_tsv(const Essay& e) {
  std::string out;
  if (!e.id.empty()) out += "#id\t" + e.id + "\n";
  if (e.meta.topic) out += "#topic\t" + *e.meta.topic + "\n";
  if (e.meta.grade) out += "#grade\t" + *e.meta.grade + "\n";
  if (e.labels)
    for (std::size_t i = 0; i < kRubricCount; ++i)
      out += "#label\t" + std::string(kRubricNames[i]) + "\t" +
             std::to_string((*e.labels)[i]) + "\n";
  for (std::size_t p = 0; p < e.paragraphs.size(); ++p) {
    if (p > 0) out += "\n\n";
    const auto& sents = e.paragraphs[p].sentences;
    for (std::size_t s = 0; s < sents.size(); ++s) {
      if (s > 0) out += "\n";
      for (const auto& w : sents[s].wordpieces) {
        out += w.raw;
        out += '\t';
        for (std::size_t m = 0; m < w.morphemes.size(); ++m) {
          if (m > 0) out += '+';
          out += w.morphemes[m].lemma;
          out += '/';
          out += to_string(w.morphemes[m].tag);
        }
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace detail

inline Json essay_to_json(const Essay& e) {
  Json j;
  j["id"] = e.id;
  Json meta = Json::object();
  if (e.meta.topic) meta["topic"] = *e.meta.topic;
  if (e.meta.grade) meta["grade"] = *e.meta.grade;
  j["meta"] = meta;
  if (e.labels) {
    Json labels = Json::object();
    for (std::size_t i = 0; i < kRubricCount; ++i)
      labels[std::string(kRubricNames[i])] = (*e.labels)[i];
    j["labels"] = labels;
  }
  Json paragraphs = Json::array();
  for (const auto& p : e.paragraphs) {
    Json sentences = Json::array();
    for (const auto& s : p.sentences) {
      Json wps = Json::array();
      for (const auto& w : s.wordpieces) {
        Json morphs = Json::array();
        for (const auto& m : w.morphemes)
          morphs.push_back({{"surface", m.surface}, {"lemma", m.lemma},
                            {"tag", std::string(to_string(m.tag))}});
        wps.push_back({{"raw", w.raw}, {"morphemes", morphs}});
      }
      sentences.push_back({{"wordpieces", wps}});
    }
    paragraphs.push_back({{"sentences", sentences}});
  }
  j["paragraphs"] = paragraphs;
  return j;
}

namespace detail {

inline const Json& member(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::MalformedRecord, std::string("missing '") + key + "'", where);
  return j.at(key);
}

inline std::string string_member(const Json& j, const char* key, const std::string& where) {
  const auto& v = member(j, key, where);
  if (!v.is_string())
    throw Error(ErrorCode::MalformedRecord, std::string("'") + key + "' must be a string",
                where);
  return v.get<std::string>();
}

// Builds morphemes from `[{surface, lemma?, tag}]`; the lemma defaults to
// the surface form.
inline std::vector<Morpheme> morphemes_from_json(const Json& arr, const std::string& where) {
  if (!arr.is_array())
    throw Error(ErrorCode::MalformedRecord, "'morphemes' must be an array", where);
  std::vector<Morpheme> out;
  for (std::size_t m = 0; m < arr.size(); ++m) {
    auto at = where + "/morphemes/" + std::to_string(m);
    Morpheme morph;
    morph.surface = string_member(arr[m], "surface", at);
    morph.lemma = arr[m].contains("lemma") && !arr[m]["lemma"].is_null()
                      ? string_member(arr[m], "lemma", at)
                      : morph.surface;
    if (morph.lemma.empty()) morph.lemma = morph.surface;
    auto code = string_member(arr[m], "tag", at);
    auto tag = parse_tag(code);
    if (!tag) throw Error(ErrorCode::UnknownTag, "unknown tag '" + code + "'", at);
    morph.tag = *tag;
    out.push_back(std::move(morph));
  }
  return out;
}

inline Sentence sentence_from_json(const Json& js, const std::string& where) {
  Sentence sent;
  const auto& wps = member(js, "wordpieces", where);
  if (!wps.is_array())
    throw Error(ErrorCode::MalformedRecord, "'wordpieces' must be an array", where);
  for (std::size_t w = 0; w < wps.size(); ++w) {
    auto at = where + "/wordpieces/" + std::to_string(w);
    Wordpiece wp;
    wp.raw = string_member(wps[w], "raw", at);
    wp.morphemes = morphemes_from_json(member(wps[w], "morphemes", at), at);
    sent.wordpieces.push_back(std::move(wp));
  }
  return sent;
}

}  // namespace detail

inline Essay essay_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedRecord, "essay must be an object", "/");
  Essay e;
  if (j.contains("id")) e.id = detail::string_member(j, "id", "/");
  if (j.contains("meta") && j["meta"].is_object()) {
    const auto& meta = j["meta"];
    if (meta.contains("topic")) e.meta.topic = detail::string_member(meta, "topic", "/meta");
    if (meta.contains("grade")) e.meta.grade = detail::string_member(meta, "grade", "/meta");
  }
  if (j.contains("labels") && !j["labels"].is_null()) {
    const auto& labels = j["labels"];
    if (!labels.is_object() || labels.size() != kRubricCount)
      throw Error(ErrorCode::MalformedRecord, "labels must name all 10 rubrics", "/labels");
    RubricScores scores{};
    for (std::size_t i = 0; i < kRubricCount; ++i) {
      std::string name(kRubricNames[i]);
      if (!labels.contains(name) || !labels[name].is_number_integer())
        throw Error(ErrorCode::MalformedRecord, "missing label '" + name + "'", "/labels");
      scores[i] = labels[name].get<int>();
    }
    if (!valid_scores(scores))
      throw Error(ErrorCode::MalformedRecord, "label outside 0..3", "/labels");
    e.labels = scores;
  }
  const auto& paras = detail::member(j, "paragraphs", "/");
  if (!paras.is_array())
    throw Error(ErrorCode::MalformedRecord, "'paragraphs' must be an array", "/paragraphs");
  std::size_t sentence_index = 0;
  for (std::size_t p = 0; p < paras.size(); ++p) {
    auto at = "/paragraphs/" + std::to_string(p);
    Paragraph para;
    const auto& sents = detail::member(paras[p], "sentences", at);
    if (!sents.is_array())
      throw Error(ErrorCode::MalformedRecord, "'sentences' must be an array", at);
    for (std::size_t s = 0; s < sents.size(); ++s) {
      auto sat = at + "/sentences/" + std::to_string(s);
      auto sent = detail::sentence_from_json(sents[s], sat);
      if (sent.wordpieces.empty())
        throw Error(ErrorCode::EmptySentence, "sentence without wordpieces",
                    "sentence " + std::to_string(sentence_index));
      para.sentences.push_back(std::move(sent));
      ++sentence_index;
    }
    e.paragraphs.push_back(std::move(para));
  }
  e.renumber();
  detail::validate(e);
  return e;
}

inline Essay parse_pretagged(std::string_view document, TextFormat format) {
  if (detail::is_blank(document))
    throw Error(ErrorCode::EmptySentence, "empty document", "sentence 0");
  if (format == TextFormat::Tsv) return detail::parse_tsv(document);
  Json j;
  try {
    j = Json::parse(document);
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(ErrorCode::MalformedRecord, ex.what(), "byte " + std::to_string(ex.byte));
  }
  return essay_from_json(j);
}

inline std::string serialize(const Essay& essay, TextFormat format) {
  if (format == TextFormat::Tsv) return detail::serialize_tsv(essay);
  return essay_to_json(essay).dump(2) + "\n";
}

inline std::string canonicalize(std::string_view document, TextFormat format) {
  return serialize(parse_pretagged(document, format), format);
}

}  // namespace ukta
