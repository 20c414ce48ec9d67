#pragma once

// Labelled corpora on disk: a directory of pre-tagged essays (*.tsv, *.json;
// read in file-name order) or a JSON-lines file with one essay per line.

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ukta/bundle.hpp"
#include "ukta/error.hpp"
#include "ukta/pretagged.hpp"
#include "ukta/rubric.hpp"

namespace ukta {

inline TextFormat format_for_path(const std::filesystem::path& p) {
  return p.extension() == ".json" ? TextFormat::Json : TextFormat::Tsv;
}

inline Essay load_essay_file(const std::filesystem::path& path) {
  try {
    return parse_pretagged(read_text_file(path.string()), format_for_path(path));
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), path.filename().string() + (e.location().empty() ? "" : ": " + e.location()));
  }
}

inline std::vector<Essay> load_dataset(const std::string& path) {
  namespace fs = std::filesystem;
  std::vector<Essay> out;
  const fs::path p(path);
  if (fs::is_directory(p)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(p)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".tsv" || ext == ".json")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      out.push_back(load_essay_file(f));
      if (out.back().id.empty()) out.back().id = f.stem().string();
    }
  } else if (fs::is_regular_file(p)) {
    const auto text = read_text_file(path);
    std::size_t line_no = 0, start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      const std::string_view line(text.data() + start, end - start);
      ++line_no;
      start = end + 1;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      try {
        out.push_back(parse_pretagged(line, TextFormat::Json));
      } catch (const Error& e) {
        throw Error(e.code(), e.what(), "line " + std::to_string(line_no));
      }
      if (out.back().id.empty()) out.back().id = "line-" + std::to_string(line_no);
    }
  } else {
    throw Error(ErrorCode::Io, "dataset path does not exist", path);
  }
  if (out.empty()) throw Error(ErrorCode::NoLabels, "dataset is empty", path);
  return out;
}

// Writes each essay as <dir>/<id>.tsv (lemma-level pre-tagged form).
inline void write_dataset(const std::string& dir, const std::vector<Essay>& essays) {
  std::filesystem::create_directories(dir);
  for (const auto& e : essays)
    write_text_file((std::filesystem::path(dir) / (e.id + ".tsv")).string(), serialize(e, TextFormat::Tsv));
}

struct Prediction {
  std::string id;
  RubricScores scores{};
};

// JSON-lines predictions: {"id": ..., "scores": {rubric name: int} | [10 ints]}.
inline std::vector<Prediction> load_predictions(const std::string& path) {
  const auto text = read_text_file(path);
  std::vector<Prediction> out;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      Prediction p;
      p.id = j.at("id").get<std::string>();
      const auto& s = j.at("scores");
      for (std::size_t k = 0; k < kRubricCount; ++k)
        p.scores[k] = s.is_array() ? s.at(k).get<int>() : s.at(std::string(kRubricNames[k])).get<int>();
      if (s.size() != kRubricCount) throw Error(ErrorCode::MalformedRecord, "need 10 rubric scores", where);
      if (!valid_scores(p.scores)) throw Error(ErrorCode::MalformedRecord, "score outside 0..3", where);
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::MalformedRecord, ex.what(), where);
    }
  }
  return out;
}

}  // namespace ukta
