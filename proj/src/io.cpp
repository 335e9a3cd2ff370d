#include "routedet/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "routedet/common.hpp"

namespace routedet {

void write_corpus(const std::string& path, const Vocabulary& vocab,
                  const std::vector<TokenSequence>& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::internal, "cannot write corpus file " + path);
    for (const auto& seq : corpus) {
        nlohmann::json rec;
        rec["source_id"] = seq.source_id;
        rec["label"] = label_name(seq.label);
        std::vector<std::string> tokens;
        tokens.reserve(seq.ids.size());
        for (auto id : seq.ids) tokens.push_back(vocab.token(id));
        rec["tokens"] = std::move(tokens);
        out << rec.dump() << "\n";
    }
}

std::vector<TokenSequence> read_corpus(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::missing_artifact, "cannot open corpus file " + path);
    std::vector<TokenSequence> corpus;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            fail(ErrorCode::config,
                 path + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
        }
        TokenSequence seq;
        seq.source_id = rec.at("source_id").get<std::string>();
        seq.label = parse_label(rec.at("label").get<std::string>());
        for (const auto& tok : rec.at("tokens")) {
            int id = vocab.find(tok.get<std::string>());
            if (id < 0)
                fail(ErrorCode::config, path + ":" + std::to_string(line_no) +
                                            ": token '" + tok.get<std::string>() +
                                            "' is not in the vocabulary");
            seq.ids.push_back(id);
        }
        if (seq.ids.empty())
            fail(ErrorCode::config, path + ":" + std::to_string(line_no) + ": empty sequence");
        corpus.push_back(std::move(seq));
    }
    return corpus;
}

int ScoreTable::column(const std::string& detector_id) const {
    for (std::size_t i = 0; i < detector_ids.size(); ++i)
        if (detector_ids[i] == detector_id) return static_cast<int>(i);
    return -1;
}

void write_score_table(const std::string& path, const ScoreTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::internal, "cannot write score table " + path);
    out << "index\tsource_id\tlabel";
    for (const auto& id : table.detector_ids) out << "\t" << id;
    out << "\n";
    for (const auto& row : table.rows) {
        if (row.scores.size() != table.detector_ids.size())
            fail(ErrorCode::internal, "score row width mismatch");
        out << row.index << "\t" << row.source_id << "\t" << label_name(row.label);
        for (double v : row.scores) out << "\t" << fmt_double(v);
        out << "\n";
    }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (;;) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
}

double parse_double_exact(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        fail(ErrorCode::config, where + ": bad numeric value '" + s + "'");
    return v;
}

}  // namespace

ScoreTable read_score_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::missing_artifact, "cannot open score table " + path);
    ScoreTable table;
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::config, path + ": empty score table");
    auto header = split_tabs(line);
    if (header.size() < 4 || header[0] != "index" || header[1] != "source_id" || header[2] != "label")
        fail(ErrorCode::config, path + ": unexpected score table header");
    table.detector_ids.assign(header.begin() + 3, header.end());
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_tabs(line);
        if (cells.size() != header.size())
            fail(ErrorCode::config, path + ":" + std::to_string(line_no) + ": row width mismatch");
        ScoreRow row;
        row.index = static_cast<int>(parse_double_exact(cells[0], path));
        row.source_id = cells[1];
        row.label = parse_label(cells[2]);
        for (std::size_t i = 3; i < cells.size(); ++i)
            row.scores.push_back(parse_double_exact(cells[i], path + ":" + std::to_string(line_no)));
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_table(const std::string& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::internal, "cannot write report " + path);
    out << join(table.header, "\t") << "\n";
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) fail(ErrorCode::internal, "report row width mismatch");
        out << join(row, "\t") << "\n";
    }
}

}  // namespace routedet
