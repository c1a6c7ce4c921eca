#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace tandem {

// Answer-similarity in [0,1] used by query-task evaluation and the accuracy
// reward. The default is token-level F1 over lowercased whitespace tokens:
// bit-reproducible, no external service. Identical strings score 1, fully
// disjoint strings score 0.
double token_f1(std::string_view predicted, std::string_view gold);

using SimilarityFn = std::function<double(std::string_view, std::string_view)>;

// Looks up a similarity function by id ("token_f1" is built in). Additional
// implementations (e.g. embedding-backed) can be registered at startup.
SimilarityFn similarity_by_id(const std::string& id);
void register_similarity(const std::string& id, SimilarityFn fn);

} // namespace tandem
