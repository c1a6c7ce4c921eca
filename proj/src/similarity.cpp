#include "tandem/similarity.hpp"

#include "tandem/errors.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>
#include <vector>

namespace tandem {

namespace {

std::vector<std::string> tokenize_lower(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

} // namespace

double token_f1(std::string_view predicted, std::string_view gold) {
    auto p = tokenize_lower(predicted);
    auto g = tokenize_lower(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;

    std::map<std::string, int> gold_counts;
    for (auto& t : g) ++gold_counts[t];
    long long overlap = 0;
    for (auto& t : p) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

namespace {

std::mutex g_registry_mutex;

std::map<std::string, SimilarityFn>& registry() {
    static std::map<std::string, SimilarityFn> fns = {
        {"token_f1", [](std::string_view a, std::string_view b) { return token_f1(a, b); }}};
    return fns;
}

} // namespace

SimilarityFn similarity_by_id(const std::string& id) {
    std::lock_guard lock(g_registry_mutex);
    auto& fns = registry();
    auto it = fns.find(id);
    if (it == fns.end()) throw ConfigError("unknown similarity function '" + id + "'");
    return it->second;
}

void register_similarity(const std::string& id, SimilarityFn fn) {
    std::lock_guard lock(g_registry_mutex);
    registry()[id] = std::move(fn);
}

} // namespace tandem
