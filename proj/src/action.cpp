#include "tandem/action.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <vector>

namespace tandem {

Action Action::tap(int index) {
    Action a;
    a.kind = ActionKind::Tap;
    a.index = index;
    return a;
}

Action Action::text(std::string s) {
    Action a;
    a.kind = ActionKind::Text;
    a.input_str = std::move(s);
    return a;
}

Action Action::swipe(int index, SwipeDirection d, SwipeDist dist) {
    Action a;
    a.kind = ActionKind::Swipe;
    a.index = index;
    a.direction = d;
    a.dist = dist;
    return a;
}

Action Action::long_press(int index) {
    Action a;
    a.kind = ActionKind::LongPress;
    a.index = index;
    return a;
}

Action Action::back() { return Action{}; }

Action Action::home() {
    Action a;
    a.kind = ActionKind::Home;
    return a;
}

Action Action::wait(int seconds) {
    Action a;
    a.kind = ActionKind::Wait;
    a.interval = seconds;
    return a;
}

Action Action::finish() {
    Action a;
    a.kind = ActionKind::Finish;
    return a;
}

Action Action::finish(std::string msg) {
    Action a;
    a.kind = ActionKind::Finish;
    a.message = std::move(msg);
    return a;
}

std::string_view to_string(ActionKind k) {
    switch (k) {
    case ActionKind::Tap: return "tap";
    case ActionKind::Text: return "text";
    case ActionKind::Swipe: return "swipe";
    case ActionKind::LongPress: return "long_press";
    case ActionKind::Back: return "back";
    case ActionKind::Home: return "home";
    case ActionKind::Wait: return "wait";
    case ActionKind::Finish: return "finish";
    }
    return "?";
}

std::string_view to_string(SwipeDirection d) {
    switch (d) {
    case SwipeDirection::Up: return "up";
    case SwipeDirection::Down: return "down";
    case SwipeDirection::Left: return "left";
    case SwipeDirection::Right: return "right";
    }
    return "?";
}

std::string_view to_string(SwipeDist d) {
    switch (d) {
    case SwipeDist::Short: return "short";
    case SwipeDist::Medium: return "medium";
    case SwipeDist::Long: return "long";
    }
    return "?";
}

std::string_view to_string(ParseErrorKind k) {
    switch (k) {
    case ParseErrorKind::UnknownFunction: return "UnknownFunction";
    case ParseErrorKind::ArityMismatch: return "ArityMismatch";
    case ParseErrorKind::BadArgumentType: return "BadArgumentType";
    case ParseErrorKind::BadEnumValue: return "BadEnumValue";
    case ParseErrorKind::MultipleCalls: return "MultipleCalls";
    }
    return "?";
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

ActionParseResult fail(ParseErrorKind kind, std::string msg) {
    ActionParseResult r;
    r.error = ParseError{kind, std::move(msg)};
    return r;
}

// One raw argument: either positional or name=value. Quoted values remember
// they were quoted so integer parameters can reject true strings.
struct RawArg {
    std::string name; // empty for positional
    std::string value;
    bool quoted = false;
};

struct Scanner {
    std::string_view s;
    size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() const { return pos < s.size() ? s[pos] : '\0'; }
};

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string scan_ident(Scanner& sc) {
    sc.skip_ws();
    size_t start = sc.pos;
    while (sc.pos < sc.s.size() && is_ident_char(sc.s[sc.pos])) ++sc.pos;
    return std::string(sc.s.substr(start, sc.pos - start));
}

// Reads a quoted string honoring \" \' and \\ escapes.
bool scan_quoted(Scanner& sc, std::string& out) {
    char quote = sc.s[sc.pos++];
    out.clear();
    while (sc.pos < sc.s.size()) {
        char c = sc.s[sc.pos++];
        if (c == '\\' && sc.pos < sc.s.size()) {
            char next = sc.s[sc.pos];
            if (next == '"' || next == '\'' || next == '\\') {
                out.push_back(next);
                ++sc.pos;
                continue;
            }
            out.push_back(c);
            continue;
        }
        if (c == quote) return true;
        out.push_back(c);
    }
    return false; // unterminated
}

// A value is a quoted string, or a bare token ending at ',' / ')' .
bool scan_value(Scanner& sc, RawArg& arg, std::string& err) {
    sc.skip_ws();
    if (sc.pos >= sc.s.size()) {
        err = "missing argument value";
        return false;
    }
    char c = sc.peek();
    if (c == '"' || c == '\'') {
        if (!scan_quoted(sc, arg.value)) {
            err = "unterminated string literal";
            return false;
        }
        arg.quoted = true;
        return true;
    }
    size_t start = sc.pos;
    while (sc.pos < sc.s.size() && sc.s[sc.pos] != ',' && sc.s[sc.pos] != ')') ++sc.pos;
    std::string_view tok = sc.s.substr(start, sc.pos - start);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
    if (tok.empty()) {
        err = "empty argument";
        return false;
    }
    arg.value = std::string(tok);
    arg.quoted = false;
    return true;
}

enum class ParamType { Int, Str, Direction, Dist };

struct ParamSpec {
    const char* name;
    ParamType type;
    bool required;
};

struct FunctionSpec {
    ActionKind kind;
    std::vector<ParamSpec> params;
};

const FunctionSpec* lookup_function(const std::string& name) {
    static const std::vector<std::pair<std::string, FunctionSpec>> table = {
        {"tap", {ActionKind::Tap, {{"index", ParamType::Int, true}}}},
        {"text", {ActionKind::Text, {{"input_str", ParamType::Str, true}}}},
        {"type", {ActionKind::Text, {{"input_str", ParamType::Str, true}}}},
        {"swipe",
         {ActionKind::Swipe,
          {{"index", ParamType::Int, true},
           {"direction", ParamType::Direction, true},
           {"dist", ParamType::Dist, true}}}},
        {"long_press", {ActionKind::LongPress, {{"index", ParamType::Int, true}}}},
        {"longpress", {ActionKind::LongPress, {{"index", ParamType::Int, true}}}},
        {"back", {ActionKind::Back, {}}},
        {"home", {ActionKind::Home, {}}},
        {"wait", {ActionKind::Wait, {{"interval", ParamType::Int, false}}}},
        {"finish", {ActionKind::Finish, {{"message", ParamType::Str, false}}}},
    };
    for (const auto& [key, spec] : table) {
        if (key == name) return &spec;
    }
    return nullptr;
}

bool parse_int(const std::string& v, int& out) {
    std::string_view sv = v;
    if (sv.empty()) return false;
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), out);
    return ec == std::errc{} && ptr == sv.data() + sv.size();
}

std::optional<SwipeDirection> parse_direction(const std::string& v) {
    std::string l = lower(v);
    if (l == "up") return SwipeDirection::Up;
    if (l == "down") return SwipeDirection::Down;
    if (l == "left") return SwipeDirection::Left;
    if (l == "right") return SwipeDirection::Right;
    return std::nullopt;
}

std::optional<SwipeDist> parse_dist(const std::string& v) {
    std::string l = lower(v);
    if (l == "short") return SwipeDist::Short;
    if (l == "medium") return SwipeDist::Medium;
    if (l == "long") return SwipeDist::Long;
    return std::nullopt;
}

} // namespace

ActionParseResult parse_action(std::string_view call_text) {
    Scanner sc{call_text};
    if (sc.done()) return fail(ParseErrorKind::UnknownFunction, "empty call text");

    std::string name = scan_ident(sc);
    if (name.empty())
        return fail(ParseErrorKind::UnknownFunction, "expected a function name");

    std::string canonical_name = lower(name);
    std::replace(canonical_name.begin(), canonical_name.end(), '-', '_');
    const FunctionSpec* spec = lookup_function(canonical_name);
    if (!spec)
        return fail(ParseErrorKind::UnknownFunction, "unknown function '" + name + "'");

    sc.skip_ws();
    if (sc.peek() != '(')
        return fail(ParseErrorKind::ArityMismatch, "expected '(' after '" + name + "'");
    ++sc.pos;

    std::vector<RawArg> args;
    sc.skip_ws();
    if (sc.peek() != ')') {
        while (true) {
            RawArg arg;
            sc.skip_ws();
            // name=value if an identifier is followed by '='
            size_t mark = sc.pos;
            std::string ident = scan_ident(sc);
            sc.skip_ws();
            if (!ident.empty() && sc.peek() == '=') {
                ++sc.pos;
                arg.name = lower(ident);
            } else {
                sc.pos = mark; // plain positional value
            }
            std::string err;
            if (!scan_value(sc, arg, err))
                return fail(ParseErrorKind::BadArgumentType, err);
            args.push_back(std::move(arg));
            sc.skip_ws();
            if (sc.peek() == ',') {
                ++sc.pos;
                continue;
            }
            break;
        }
    }
    sc.skip_ws();
    if (sc.peek() != ')')
        return fail(ParseErrorKind::ArityMismatch, "expected ')' to close the call");
    ++sc.pos;
    if (!sc.done())
        return fail(ParseErrorKind::MultipleCalls,
                    "more than one call in the block: trailing '" +
                        std::string(call_text.substr(sc.pos)) + "'");

    // Bind arguments to parameters: positionals first, then keywords.
    const auto& params = spec->params;
    std::vector<std::optional<RawArg>> bound(params.size());
    size_t next_positional = 0;
    for (auto& arg : args) {
        if (arg.name.empty()) {
            if (next_positional >= params.size())
                return fail(ParseErrorKind::ArityMismatch,
                            "too many arguments for '" + canonical_name + "'");
            bound[next_positional++] = std::move(arg);
        } else {
            bool matched = false;
            for (size_t i = 0; i < params.size(); ++i) {
                if (arg.name == params[i].name) {
                    if (bound[i])
                        return fail(ParseErrorKind::ArityMismatch,
                                    "duplicate argument '" + arg.name + "'");
                    bound[i] = std::move(arg);
                    matched = true;
                    break;
                }
            }
            if (!matched)
                return fail(ParseErrorKind::ArityMismatch,
                            "unknown parameter '" + arg.name + "' for '" + canonical_name + "'");
        }
    }
    for (size_t i = 0; i < params.size(); ++i) {
        if (params[i].required && !bound[i])
            return fail(ParseErrorKind::ArityMismatch,
                        std::string("missing argument '") + params[i].name + "' for '" +
                            canonical_name + "'");
    }

    Action action;
    action.kind = spec->kind;
    for (size_t i = 0; i < params.size(); ++i) {
        if (!bound[i]) continue;
        const RawArg& arg = *bound[i];
        const ParamSpec& p = params[i];
        switch (p.type) {
        case ParamType::Int: {
            int v = 0;
            if (!parse_int(arg.value, v))
                return fail(ParseErrorKind::BadArgumentType,
                            std::string("argument '") + p.name + "' must be an integer, got '" +
                                arg.value + "'");
            if (std::string_view(p.name) == "index") {
                if (v < 1)
                    return fail(ParseErrorKind::BadArgumentType,
                                "element index must be >= 1, got " + arg.value);
                action.index = v;
            } else { // interval
                if (v < 0)
                    return fail(ParseErrorKind::BadArgumentType,
                                "interval must be >= 0, got " + arg.value);
                action.interval = v;
            }
            break;
        }
        case ParamType::Str:
            if (std::string_view(p.name) == "input_str")
                action.input_str = arg.value;
            else
                action.message = arg.value;
            break;
        case ParamType::Direction: {
            auto d = parse_direction(arg.value);
            if (!d)
                return fail(ParseErrorKind::BadEnumValue,
                            "direction must be up/down/left/right, got '" + arg.value + "'");
            action.direction = *d;
            break;
        }
        case ParamType::Dist: {
            auto d = parse_dist(arg.value);
            if (!d)
                return fail(ParseErrorKind::BadEnumValue,
                            "dist must be short/medium/long, got '" + arg.value + "'");
            action.dist = *d;
            break;
        }
        }
    }
    if (action.kind == ActionKind::Wait && !action.interval) action.interval = 5;

    ActionParseResult r;
    r.action = std::move(action);
    return r;
}

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

} // namespace

std::string render_action(const Action& a) {
    switch (a.kind) {
    case ActionKind::Tap:
        return "tap(" + std::to_string(a.index.value_or(0)) + ")";
    case ActionKind::Text:
        return "text(" + quote(a.input_str.value_or("")) + ")";
    case ActionKind::Swipe:
        return "swipe(" + std::to_string(a.index.value_or(0)) + ", " +
               quote(std::string(to_string(a.direction.value_or(SwipeDirection::Up)))) + ", " +
               quote(std::string(to_string(a.dist.value_or(SwipeDist::Short)))) + ")";
    case ActionKind::LongPress:
        return "long_press(" + std::to_string(a.index.value_or(0)) + ")";
    case ActionKind::Back:
        return "back()";
    case ActionKind::Home:
        return "home()";
    case ActionKind::Wait:
        return "wait(" + std::to_string(a.interval.value_or(5)) + ")";
    case ActionKind::Finish:
        return a.message ? "finish(" + quote(*a.message) + ")" : "finish()";
    }
    return "back()";
}

} // namespace tandem
