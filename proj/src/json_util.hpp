#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "gridshed/component.hpp"

namespace gridshed::detail {

template <class T>
bool holds(const nlohmann::json& v) {
  if constexpr (std::is_same_v<T, int>) {
    return v.is_number_integer();
  } else if constexpr (std::is_same_v<T, double>) {
    return v.is_number();
  } else if constexpr (std::is_same_v<T, bool>) {
    return v.is_boolean();
  } else {
    return v.is_string();
  }
}

template <class T>
const char* type_name() {
  if constexpr (std::is_same_v<T, int>) {
    return "an integer";
  } else if constexpr (std::is_same_v<T, double>) {
    return "a number";
  } else if constexpr (std::is_same_v<T, bool>) {
    return "a boolean";
  } else {
    return "a string";
  }
}

template <class T>
std::optional<T> get_optional_field(const nlohmann::json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!holds<T>(*it)) throw ParseError(where + "." + key + " must be " + type_name<T>());
  return it->template get<T>();
}

template <class T>
T get_field(const nlohmann::json& j, const char* key, const std::string& where) {
  auto v = get_optional_field<T>(j, key, where);
  if (!v) throw ParseError(where + " is missing field '" + key + "'");
  return *v;
}

}  // namespace gridshed::detail
