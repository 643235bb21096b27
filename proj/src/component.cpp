#include "gridshed/component.hpp"

namespace gridshed {

std::string_view to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::bus:
      return "bus";
    case ComponentKind::line:
      return "line";
    case ComponentKind::generator:
      return "gen";
    case ComponentKind::load:
      return "load";
  }
  return "unknown";
}

std::optional<ComponentKind> parse_component_kind(std::string_view text) {
  if (text == "bus") return ComponentKind::bus;
  if (text == "line" || text == "branch") return ComponentKind::line;
  if (text == "gen" || text == "generator") return ComponentKind::generator;
  if (text == "load") return ComponentKind::load;
  return std::nullopt;
}

std::string to_string(const ComponentRef& ref) {
  return std::string(to_string(ref.kind)) + ":" + std::to_string(ref.id);
}

}  // namespace gridshed
