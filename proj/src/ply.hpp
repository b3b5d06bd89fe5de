#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace peel::ply {

enum class Type { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

struct Property {
  std::string name;
  Type type = Type::kFloat32;
  bool is_list = false;
  Type count_type = Type::kUInt8;
};

/// Scalar properties are stored column-wise as doubles, list properties as index lists.
struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
  std::vector<std::vector<double>> scalars;              // per property (empty for lists)
  std::vector<std::vector<std::vector<std::int64_t>>> lists;  // per property (empty for scalars)

  std::optional<std::size_t> find(const std::string& name) const;
};

struct File {
  std::vector<Element> elements;

  const Element* find(const std::string& name) const;
};

/// Parses ascii, binary_little_endian and binary_big_endian PLY. Throws ParseError.
File read(const std::filesystem::path& path);

}  // namespace peel::ply
