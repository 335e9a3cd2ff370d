#pragma once

#include <string>
#include <vector>

#include "routedet/vocab.hpp"

namespace routedet {

// Corpus files are JSONL: one record per line with the token string list,
// label and source id.
void write_corpus(const std::string& path, const Vocabulary& vocab,
                  const std::vector<TokenSequence>& corpus);
std::vector<TokenSequence> read_corpus(const std::string& path, const Vocabulary& vocab);

struct ScoreRow {
    int index = 0;
    std::string source_id;
    Label label = Label::machine;
    std::vector<double> scores;
};

// One row per text, one column per detector (criterion@surrogate).
struct ScoreTable {
    std::vector<std::string> detector_ids;
    std::vector<ScoreRow> rows;

    int column(const std::string& detector_id) const;  // -1 when absent
};

void write_score_table(const std::string& path, const ScoreTable& table);
ScoreTable read_score_table(const std::string& path);

// Generic delimiter-separated report table.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_table(const std::string& path, const Table& table);

}  // namespace routedet
