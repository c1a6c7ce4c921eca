#pragma once

#include <stdexcept>
#include <string>

namespace tandem {

// Configuration-level failure: bad pack file, unknown template id, invalid
// suite config. Thrown at setup time, never mid-episode.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Backend invocation failure surfaced after retries are exhausted. Episodes
// catch this and terminate with the reason recorded; the suite never crashes.
class BackendError : public std::runtime_error {
public:
    enum class Kind { Transport, Auth, ScriptExhausted };

    BackendError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

} // namespace tandem
