#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace routedet {

enum class Label { human, machine };

std::string label_name(Label l);
Label parse_label(const std::string& s);

class Vocabulary {
  public:
    Vocabulary() = default;
    // throws Error(config) on duplicates or size < 2
    explicit Vocabulary(std::vector<std::string> tokens);

    int size() const { return static_cast<int>(tokens_.size()); }
    const std::string& token(int id) const { return tokens_[static_cast<std::size_t>(id)]; }
    const std::vector<std::string>& tokens() const { return tokens_; }
    // -1 when absent
    int find(const std::string& token) const;

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

  private:
    std::vector<std::string> tokens_;
};

struct TokenSequence {
    std::vector<std::int32_t> ids;
    Label label = Label::machine;
    std::string source_id;
};

// Lowercase character-level alphabet: a..z, space, "<unk>" (V = 28).
// Out-of-alphabet characters map to the UNK token.
Vocabulary char_alphabet();

// First `size` tokens of the canonical alphabet, for small synthetic pools.
Vocabulary char_alphabet_prefix(int size);

// Character-level ingestion of external text against a vocabulary.
// Unknown characters map to "<unk>" when the vocabulary has it, otherwise error.
TokenSequence tokenize_text(const Vocabulary& vocab, const std::string& text, Label label,
                            const std::string& source_id = "");

// Inverse of tokenize_text for single-character vocabularies; used by tooling.
std::string render_text(const Vocabulary& vocab, const TokenSequence& x);

}  // namespace routedet
