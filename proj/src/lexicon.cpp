#include "wuglab/lexicon.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "wuglab/error.hpp"
#include "wuglab/rng.hpp"

namespace wuglab {

std::optional<LexicalCategory> Lexicon::category_of(const std::string& word) const {
    for (LexicalCategory c : all_categories()) {
        const auto& list = words_of(c);
        if (std::find(list.begin(), list.end(), word) != list.end()) {
            return c;
        }
    }
    return std::nullopt;
}

std::size_t Lexicon::content_word_count() const {
    std::size_t n = 0;
    for (const auto& list : words) {
        n += list.size();
    }
    return n;
}

void Lexicon::validate() const {
    std::unordered_set<std::string> seen(function_words.begin(), function_words.end());
    if (seen.size() != function_words.size()) {
        throw std::invalid_argument("lexicon: duplicate function word");
    }
    for (const auto& list : words) {
        for (const auto& w : list) {
            if (!seen.insert(w).second) {
                throw std::invalid_argument("lexicon: word appears twice: " + w);
            }
        }
    }
}

const std::vector<std::string>& reserved_novel_names() {
    static const std::vector<std::string> names = {"wug", "dax"};
    return names;
}

namespace {

std::string make_cvc_word(Rng& rng, std::size_t length) {
    static constexpr char kConsonants[] = "bcdfghjklmnpqrstvwz";
    static constexpr char kVowels[] = "aeiou";
    std::string word;
    word.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        if (i % 2 == 0) {
            word.push_back(kConsonants[rng.index_below(sizeof(kConsonants) - 1)]);
        } else {
            word.push_back(kVowels[rng.index_below(sizeof(kVowels) - 1)]);
        }
    }
    return word;
}

}  // namespace

Lexicon build_lexicon(std::size_t n_per_category, std::uint64_t seed) {
    if (n_per_category < 10) {
        throw std::invalid_argument("build_lexicon: need at least 10 words per category");
    }
    Lexicon lex;
    lex.function_words = {kPadToken, kMaskToken, kDeterminer, kPeriod};

    std::unordered_set<std::string> taken(lex.function_words.begin(), lex.function_words.end());
    for (const auto& name : reserved_novel_names()) {
        taken.insert(name);
    }

    Rng rng(mix_seed(seed, 0x6c657869636f6eULL));  // "lexicon"
    for (LexicalCategory c : all_categories()) {
        auto& list = lex.words[category_index(c)];
        list.reserve(n_per_category);
        while (list.size() < n_per_category) {
            const std::size_t length = 3 + rng.index_below(4);
            std::string word = make_cvc_word(rng, length);
            if (taken.insert(word).second) {
                list.push_back(std::move(word));
            }
        }
    }
    lex.validate();
    return lex;
}

Vocab::Vocab(Lexicon lexicon, std::size_t novel_slots)
    : lexicon_(std::move(lexicon)), novel_slots_(novel_slots) {
    lexicon_.validate();
    for (const auto& w : lexicon_.function_words) {
        ids_.emplace(w, static_cast<int>(tokens_.size()));
        tokens_.push_back(w);
    }
    if (tokens_.size() < 2 || tokens_[0] != kPadToken || tokens_[1] != kMaskToken) {
        throw std::invalid_argument("Vocab: function words must start with pad and mask");
    }
    for (LexicalCategory c : all_categories()) {
        const int begin = static_cast<int>(tokens_.size());
        for (const auto& w : lexicon_.words_of(c)) {
            ids_.emplace(w, static_cast<int>(tokens_.size()));
            tokens_.push_back(w);
        }
        category_ranges_[category_index(c)] = {begin, static_cast<int>(tokens_.size())};
    }
    novel_begin_ = static_cast<int>(tokens_.size());
    for (std::size_t i = 0; i < novel_slots_; ++i) {
        tokens_.push_back("[NOVEL" + std::to_string(i) + "]");
    }
}

const std::string& Vocab::token(int id) const {
    if (id < 0 || id >= static_cast<int>(tokens_.size())) {
        throw std::invalid_argument("Vocab::token: id out of range");
    }
    return tokens_[static_cast<std::size_t>(id)];
}

int Vocab::id_of(const std::string& token) const {
    const auto id = try_id_of(token);
    if (!id) {
        throw std::invalid_argument("Vocab::id_of: unknown token: " + token);
    }
    return *id;
}

std::optional<int> Vocab::try_id_of(const std::string& token) const {
    const auto it = ids_.find(token);
    if (it == ids_.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool Vocab::is_content(int id) const {
    return category_of_id(id).has_value();
}

std::optional<LexicalCategory> Vocab::category_of_id(int id) const {
    for (LexicalCategory c : all_categories()) {
        const auto [begin, end] = category_ranges_[category_index(c)];
        if (id >= begin && id < end) {
            return c;
        }
    }
    return std::nullopt;
}

std::pair<int, int> Vocab::category_id_range(LexicalCategory c) const {
    return category_ranges_[category_index(c)];
}

int Vocab::register_novel(const std::string& name) {
    if (novel_used_ >= novel_slots_) {
        throw Error("novel-token capacity exhausted (" + std::to_string(novel_slots_) +
                    " slots)");
    }
    if (ids_.count(name) != 0) {
        throw Error("novel-token name collides with existing token: " + name);
    }
    const int id = novel_begin_ + static_cast<int>(novel_used_);
    tokens_[static_cast<std::size_t>(id)] = name;
    ids_.emplace(name, id);
    ++novel_used_;
    return id;
}

}  // namespace wuglab
