#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace tandem {

// The eight GUI primitives. Elements are referenced by their numeric
// set-of-mark index, never by coordinates.
enum class ActionKind { Tap, Text, Swipe, LongPress, Back, Home, Wait, Finish };

enum class SwipeDirection { Up, Down, Left, Right };
enum class SwipeDist { Short, Medium, Long };

// One executable GUI primitive. Exactly the fields required by `kind` are
// populated; all others stay empty.
struct Action {
    ActionKind kind = ActionKind::Back;
    std::optional<int> index;                // Tap / Swipe / LongPress; >= 1
    std::optional<std::string> input_str;    // Text
    std::optional<SwipeDirection> direction; // Swipe
    std::optional<SwipeDist> dist;           // Swipe
    std::optional<int> interval;             // Wait; seconds, >= 0
    std::optional<std::string> message;      // Finish (optional)

    bool operator==(const Action&) const = default;

    static Action tap(int index);
    static Action text(std::string s);
    static Action swipe(int index, SwipeDirection d, SwipeDist dist);
    static Action long_press(int index);
    static Action back();
    static Action home();
    static Action wait(int seconds = 5);
    static Action finish();
    static Action finish(std::string msg);
};

enum class ParseErrorKind {
    UnknownFunction,
    ArityMismatch,
    BadArgumentType,
    BadEnumValue,
    MultipleCalls,
};

struct ParseError {
    ParseErrorKind kind = ParseErrorKind::UnknownFunction;
    std::string message;
};

struct ActionParseResult {
    std::optional<Action> action;
    std::optional<ParseError> error;

    bool ok() const { return action.has_value(); }
};

// Parses the content of a CALLED_FUNCTION block into a typed Action.
// Tolerant of model output variation: case-insensitive names, positional and
// name=value argument styles, single/double/unquoted strings. Total: every
// input yields either an Action or a typed error, never an abort.
ActionParseResult parse_action(std::string_view call_text);

// Canonical call text: lowercase name, positional args, double-quoted
// strings. parse_action(render_action(a)) == a for every valid Action.
std::string render_action(const Action& a);

std::string_view to_string(ActionKind k);
std::string_view to_string(SwipeDirection d);
std::string_view to_string(SwipeDist d);
std::string_view to_string(ParseErrorKind k);

} // namespace tandem
