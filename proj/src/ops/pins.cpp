#include <charconv>
#include <map>

#include "gridshed/ops.hpp"

namespace gridshed {

std::string to_string(PinState state) { return state == PinState::force_on ? "on" : "off"; }

std::string to_string(const Pin& pin) { return to_string(pin.component) + ":" + to_string(pin.state); }

Pin parse_pin(std::string_view text) {
  const auto first = text.find(':');
  const auto last = text.rfind(':');
  if (first == std::string_view::npos || first == last) {
    throw ParseError("pin '" + std::string(text) + "' must look like kind:id:on|off");
  }
  Pin pin;
  const auto kind = parse_component_kind(text.substr(0, first));
  if (!kind) throw ParseError("pin '" + std::string(text) + "' has an unknown component kind");
  pin.component.kind = *kind;
  const auto id_text = text.substr(first + 1, last - first - 1);
  int id = 0;
  auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
  if (ec != std::errc() || ptr != id_text.data() + id_text.size()) {
    throw ParseError("pin '" + std::string(text) + "' has a bad id");
  }
  pin.component.id = id;
  const auto state = text.substr(last + 1);
  if (state == "on") {
    pin.state = PinState::force_on;
  } else if (state == "off") {
    pin.state = PinState::force_off;
  } else {
    throw ParseError("pin '" + std::string(text) + "' state must be on or off");
  }
  return pin;
}

void check_pins(const Network& network, const std::vector<Pin>& pins) {
  std::map<ComponentRef, PinState> seen;
  for (const auto& pin : pins) {
    if (!network.contains(pin.component)) {
      throw InvalidPinError("pin references unknown component " + to_string(pin.component));
    }
    auto [it, inserted] = seen.emplace(pin.component, pin.state);
    if (!inserted) {
      if (it->second != pin.state) {
        throw ContradictoryPinsError("component " + to_string(pin.component) + " is pinned both on and off");
      }
      throw InvalidPinError("component " + to_string(pin.component) + " is pinned twice");
    }
  }
  auto bus_off = [&](int bus) {
    auto it = seen.find({ComponentKind::bus, bus});
    return it != seen.end() && it->second == PinState::force_off;
  };
  for (const auto& [ref, state] : seen) {
    if (state != PinState::force_on) continue;
    if (ref.kind == ComponentKind::line) {
      const auto& line = network.lines()[network.line_index(ref.id)];
      for (int bus : {line.from_bus, line.to_bus}) {
        if (bus_off(bus)) {
          throw ContradictoryPinsError("line " + std::to_string(ref.id) + " is pinned on but its endpoint bus " +
                                       std::to_string(bus) + " is pinned off");
        }
      }
    } else if (ref.kind == ComponentKind::generator) {
      const auto& gen = network.generators()[network.generator_index(ref.id)];
      if (bus_off(gen.bus)) {
        throw ContradictoryPinsError("generator " + std::to_string(ref.id) + " is pinned on but its bus " +
                                     std::to_string(gen.bus) + " is pinned off");
      }
    }
  }
}

}  // namespace gridshed
