#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wuglab/category.hpp"

namespace wuglab {

// Words of the synthetic grammar, grouped by category, plus the closed set
// of function words. Word lists are ordered; order defines token ids.
struct Lexicon {
    // Function words in id order: pad, mask, determiner, period.
    std::vector<std::string> function_words;
    std::array<std::vector<std::string>, kNumCategories> words;

    const std::vector<std::string>& words_of(LexicalCategory c) const {
        return words[category_index(c)];
    }
    std::optional<LexicalCategory> category_of(const std::string& word) const;

    std::size_t content_word_count() const;
    void validate() const;  // throws std::invalid_argument on a broken lexicon
};

inline constexpr const char* kPadToken = "[PAD]";
inline constexpr const char* kMaskToken = "[MASK]";
inline constexpr const char* kDeterminer = "the";
inline constexpr const char* kPeriod = ".";

// Synthetic words per category: consonant-vowel alternating strings of
// length 3-6, collision-checked against function words, reserved novel-token
// names, and each other. Deterministic per seed.
Lexicon build_lexicon(std::size_t n_per_category, std::uint64_t seed);

// Names excluded from generated lexicons so the protocol can always
// register them as novel tokens.
const std::vector<std::string>& reserved_novel_names();

// Token-id space over a lexicon: function words first, then content words
// grouped in category order, then reserved novel slots. Novel slots start
// unnamed and are claimed one at a time.
class Vocab {
public:
    Vocab(Lexicon lexicon, std::size_t novel_slots);

    std::size_t size() const { return tokens_.size(); }
    int pad_id() const { return 0; }
    int mask_id() const { return 1; }

    const std::string& token(int id) const;
    int id_of(const std::string& token) const;  // throws std::invalid_argument
    std::optional<int> try_id_of(const std::string& token) const;

    bool is_content(int id) const;
    std::optional<LexicalCategory> category_of_id(int id) const;
    // Contiguous id range [begin, end) of a category's words.
    std::pair<int, int> category_id_range(LexicalCategory c) const;

    std::size_t novel_slots() const { return novel_slots_; }
    std::size_t novel_used() const { return novel_used_; }
    int novel_begin() const { return novel_begin_; }
    bool is_novel(int id) const {
        return id >= novel_begin_ && id < novel_begin_ + static_cast<int>(novel_slots_);
    }
    bool is_registered_novel(int id) const {
        return id >= novel_begin_ && id < novel_begin_ + static_cast<int>(novel_used_);
    }
    // Claims the next free reserved slot. Throws Error when capacity is
    // exhausted or the name collides with an existing token.
    int register_novel(const std::string& name);

    const Lexicon& lexicon() const { return lexicon_; }

private:
    Lexicon lexicon_;
    std::size_t novel_slots_;
    std::size_t novel_used_ = 0;
    int novel_begin_ = 0;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
    std::array<std::pair<int, int>, kNumCategories> category_ranges_{};
};

}  // namespace wuglab
