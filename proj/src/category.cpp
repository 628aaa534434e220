#include "wuglab/category.hpp"

#include <stdexcept>

namespace wuglab {

std::string_view category_name(LexicalCategory c) {
    switch (c) {
        case LexicalCategory::Noun: return "noun";
        case LexicalCategory::Verb: return "verb";
        case LexicalCategory::Adj: return "adj";
        case LexicalCategory::Adv: return "adv";
    }
    throw std::invalid_argument("category_name: bad enum value");
}

LexicalCategory category_from_name(std::string_view name) {
    for (LexicalCategory c : all_categories()) {
        if (category_name(c) == name) {
            return c;
        }
    }
    throw std::invalid_argument("unknown category name: " + std::string(name));
}

CategoryPair CategoryPair::of(LexicalCategory a, LexicalCategory b) {
    if (a == b) {
        throw std::invalid_argument("CategoryPair requires two distinct categories");
    }
    if (category_index(a) > category_index(b)) {
        std::swap(a, b);
    }
    return CategoryPair{a, b};
}

std::string CategoryPair::name() const {
    return std::string(category_name(first)) + "-" + std::string(category_name(second));
}

LexicalCategory CategoryPair::other(LexicalCategory c) const {
    if (c == first) {
        return second;
    }
    if (c == second) {
        return first;
    }
    throw std::invalid_argument("CategoryPair::other: category not in pair");
}

CategoryPair pair_from_name(std::string_view name) {
    const auto dash = name.find('-');
    if (dash == std::string_view::npos) {
        throw std::invalid_argument("bad pair name: " + std::string(name));
    }
    return CategoryPair::of(category_from_name(name.substr(0, dash)),
                            category_from_name(name.substr(dash + 1)));
}

std::vector<CategoryPair> all_category_pairs() {
    std::vector<CategoryPair> pairs;
    const auto cats = all_categories();
    for (std::size_t i = 0; i < cats.size(); ++i) {
        for (std::size_t j = i + 1; j < cats.size(); ++j) {
            pairs.push_back(CategoryPair{cats[i], cats[j]});
        }
    }
    return pairs;
}

}  // namespace wuglab
