#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wuglab {

// The four word classes of the synthetic grammar. Declaration order is the
// canonical total order used for pair naming and report sorting.
enum class LexicalCategory : int { Noun = 0, Verb = 1, Adj = 2, Adv = 3 };

inline constexpr std::size_t kNumCategories = 4;

inline constexpr std::array<LexicalCategory, kNumCategories> all_categories() {
    return {LexicalCategory::Noun, LexicalCategory::Verb, LexicalCategory::Adj,
            LexicalCategory::Adv};
}

std::string_view category_name(LexicalCategory c);
LexicalCategory category_from_name(std::string_view name);  // throws std::invalid_argument

inline std::size_t category_index(LexicalCategory c) {
    return static_cast<std::size_t>(c);
}

// Unordered pair of distinct categories, stored canonically (first < second
// in declaration order). Exactly six distinct pairs exist.
struct CategoryPair {
    LexicalCategory first;
    LexicalCategory second;

    static CategoryPair of(LexicalCategory a, LexicalCategory b);  // throws if a == b

    std::string name() const;  // e.g. "noun-verb"
    bool contains(LexicalCategory c) const { return c == first || c == second; }
    LexicalCategory other(LexicalCategory c) const;

    bool operator==(const CategoryPair&) const = default;
};

CategoryPair pair_from_name(std::string_view name);  // throws std::invalid_argument

// All six pairs in canonical listing order.
std::vector<CategoryPair> all_category_pairs();

}  // namespace wuglab
