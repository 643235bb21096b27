#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gridshed {

enum class ComponentKind { bus, line, generator, load };

/// Identifies one network element by kind and id.
struct ComponentRef {
  ComponentKind kind = ComponentKind::bus;
  int id = 0;

  auto operator<=>(const ComponentRef&) const = default;
};

std::string_view to_string(ComponentKind kind);

/// Accepts "bus", "line", "gen"/"generator" and "load".
std::optional<ComponentKind> parse_component_kind(std::string_view text);

/// "kind:id", e.g. "line:12".
std::string to_string(const ComponentRef& ref);

/// Base class of every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally readable input that breaks a domain rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridshed
