#include "routedet/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "routedet/common.hpp"

namespace routedet {

std::string label_name(Label l) {
    return l == Label::human ? "human" : "machine";
}

Label parse_label(const std::string& s) {
    if (s == "human") return Label::human;
    if (s == "machine") return Label::machine;
    fail(ErrorCode::config, "unknown label '" + s + "'");
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < 2) fail(ErrorCode::config, "vocabulary must contain at least 2 tokens");
    std::unordered_set<std::string> seen;
    for (const auto& t : tokens_) {
        if (!seen.insert(t).second) fail(ErrorCode::config, "duplicate vocabulary token '" + t + "'");
    }
}

int Vocabulary::find(const std::string& token) const {
    auto it = std::find(tokens_.begin(), tokens_.end(), token);
    return it == tokens_.end() ? -1 : static_cast<int>(it - tokens_.begin());
}

static const char* kUnkToken = "<unk>";

Vocabulary char_alphabet() {
    return char_alphabet_prefix(28);
}

Vocabulary char_alphabet_prefix(int size) {
    if (size < 2 || size > 28) fail(ErrorCode::config, "alphabet size must be in [2, 28]");
    std::vector<std::string> tokens;
    tokens.reserve(static_cast<std::size_t>(size));
    for (int i = 0; i < size && i < 26; ++i) tokens.emplace_back(1, static_cast<char>('a' + i));
    if (size >= 27) tokens.emplace_back(" ");
    if (size >= 28) tokens.emplace_back(kUnkToken);
    return Vocabulary(std::move(tokens));
}

TokenSequence tokenize_text(const Vocabulary& vocab, const std::string& text, Label label,
                            const std::string& source_id) {
    int unk = vocab.find(kUnkToken);
    TokenSequence out;
    out.label = label;
    out.source_id = source_id;
    out.ids.reserve(text.size());
    for (char raw : text) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
        int id = vocab.find(std::string(1, c));
        if (id < 0) id = unk;
        if (id < 0) fail(ErrorCode::config, "character '" + std::string(1, raw) +
                                                "' is outside the model vocabulary and no <unk> token exists");
        out.ids.push_back(id);
    }
    if (out.ids.empty()) fail(ErrorCode::config, "tokenized text is empty");
    return out;
}

std::string render_text(const Vocabulary& vocab, const TokenSequence& x) {
    std::string out;
    for (auto id : x.ids) {
        const std::string& t = vocab.token(id);
        out += (t == kUnkToken) ? "?" : t;
    }
    return out;
}

}  // namespace routedet
