#include "ply.hpp"

#include "peel/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace peel::ply {

std::optional<std::size_t> Element::find(const std::string& prop) const {
  for (std::size_t i = 0; i < properties.size(); ++i) {
    if (properties[i].name == prop) {
      return i;
    }
  }
  return std::nullopt;
}

const Element* File::find(const std::string& name) const {
  for (const Element& e : elements) {
    if (e.name == name) {
      return &e;
    }
  }
  return nullptr;
}

namespace {

enum class Format { kAscii, kBinaryLittle, kBinaryBig };

std::optional<Type> parse_type(const std::string& s) {
  if (s == "char" || s == "int8") return Type::kInt8;
  if (s == "uchar" || s == "uint8") return Type::kUInt8;
  if (s == "short" || s == "int16") return Type::kInt16;
  if (s == "ushort" || s == "uint16") return Type::kUInt16;
  if (s == "int" || s == "int32") return Type::kInt32;
  if (s == "uint" || s == "uint32") return Type::kUInt32;
  if (s == "float" || s == "float32") return Type::kFloat32;
  if (s == "double" || s == "float64") return Type::kFloat64;
  return std::nullopt;
}

std::size_t type_size(Type t) {
  switch (t) {
    case Type::kInt8:
    case Type::kUInt8:
      return 1;
    case Type::kInt16:
    case Type::kUInt16:
      return 2;
    case Type::kInt32:
    case Type::kUInt32:
    case Type::kFloat32:
      return 4;
    case Type::kFloat64:
      return 8;
  }
  return 0;
}

template <typename T>
T load(const unsigned char* bytes, bool swap) {
  unsigned char tmp[sizeof(T)];
  std::memcpy(tmp, bytes, sizeof(T));
  if (swap) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(tmp[i], tmp[sizeof(T) - 1 - i]);
    }
  }
  T value;
  std::memcpy(&value, tmp, sizeof(T));
  return value;
}

class BinaryReader {
 public:
  BinaryReader(std::istream& in, bool swap, const std::filesystem::path& path)
      : in_(in), swap_(swap), path_(path) {}

  double read(Type t) {
    unsigned char buf[8];
    const std::size_t n = type_size(t);
    if (!in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n))) {
      throw ParseError(ParseErrorKind::kCountMismatch, path_,
                       "file ends before the declared element count");
    }
    switch (t) {
      case Type::kInt8: return load<std::int8_t>(buf, false);
      case Type::kUInt8: return load<std::uint8_t>(buf, false);
      case Type::kInt16: return load<std::int16_t>(buf, swap_);
      case Type::kUInt16: return load<std::uint16_t>(buf, swap_);
      case Type::kInt32: return load<std::int32_t>(buf, swap_);
      case Type::kUInt32: return load<std::uint32_t>(buf, swap_);
      case Type::kFloat32: return load<float>(buf, swap_);
      case Type::kFloat64: return load<double>(buf, swap_);
    }
    return 0.0;
  }

 private:
  std::istream& in_;
  bool swap_;
  const std::filesystem::path& path_;
};

Format parse_header(std::istream& in, const std::filesystem::path& path, File& file) {
  auto fail = [&](const std::string& what) {
    throw ParseError(ParseErrorKind::kMalformedHeader, path, what);
  };

  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
    fail("missing 'ply' magic");
  }
  std::optional<Format> format;
  bool ended = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    std::istringstream ss(line);
    std::string keyword;
    ss >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") {
      continue;
    }
    if (keyword == "format") {
      std::string name, version;
      ss >> name >> version;
      if (name == "ascii") format = Format::kAscii;
      else if (name == "binary_little_endian") format = Format::kBinaryLittle;
      else if (name == "binary_big_endian") format = Format::kBinaryBig;
      else fail("unknown format '" + name + "'");
    } else if (keyword == "element") {
      Element e;
      long long count = -1;
      ss >> e.name >> count;
      if (e.name.empty() || count < 0 || ss.fail()) {
        fail("bad element line: " + line);
      }
      e.count = static_cast<std::size_t>(count);
      file.elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (file.elements.empty()) {
        fail("property before any element");
      }
      Property p;
      std::string type;
      ss >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ss >> count_type >> item_type >> p.name;
        auto ct = parse_type(count_type);
        auto it = parse_type(item_type);
        if (!ct || !it || p.name.empty()) {
          fail("bad list property: " + line);
        }
        p.is_list = true;
        p.count_type = *ct;
        p.type = *it;
      } else {
        auto t = parse_type(type);
        ss >> p.name;
        if (!t || p.name.empty()) {
          fail("bad property: " + line);
        }
        p.type = *t;
      }
      file.elements.back().properties.push_back(std::move(p));
    } else if (keyword == "end_header") {
      ended = true;
      break;
    } else {
      fail("unexpected header line: " + line);
    }
  }
  if (!format) {
    fail("missing format line");
  }
  if (!ended) {
    fail("missing end_header");
  }
  return *format;
}

void allocate(Element& e) {
  e.scalars.assign(e.properties.size(), {});
  e.lists.assign(e.properties.size(), {});
  for (std::size_t i = 0; i < e.properties.size(); ++i) {
    if (e.properties[i].is_list) {
      e.lists[i].reserve(e.count);
    } else {
      e.scalars[i].reserve(e.count);
    }
  }
}

}  // namespace

File read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(path, "cannot open");
  }
  File file;
  const Format format = parse_header(in, path, file);

  if (format == Format::kAscii) {
    for (Element& e : file.elements) {
      allocate(e);
      for (std::size_t row = 0; row < e.count; ++row) {
        std::string line;
        do {
          if (!std::getline(in, line)) {
            throw ParseError(ParseErrorKind::kCountMismatch, path,
                             "element '" + e.name + "' declares " + std::to_string(e.count) +
                                 " rows, found " + std::to_string(row));
          }
        } while (line.find_first_not_of(" \t\r") == std::string::npos);
        std::istringstream ss(line);
        for (std::size_t i = 0; i < e.properties.size(); ++i) {
          const Property& p = e.properties[i];
          if (p.is_list) {
            long long n = -1;
            ss >> n;
            if (ss.fail() || n < 0) {
              throw ParseError(ParseErrorKind::kMalformedData, path, "bad list in: " + line);
            }
            std::vector<std::int64_t> items(static_cast<std::size_t>(n));
            for (auto& item : items) {
              double v;
              ss >> v;
              item = static_cast<std::int64_t>(v);
            }
            if (ss.fail()) {
              throw ParseError(ParseErrorKind::kMalformedData, path, "bad list in: " + line);
            }
            e.lists[i].push_back(std::move(items));
          } else {
            double v;
            ss >> v;
            if (ss.fail()) {
              throw ParseError(ParseErrorKind::kMalformedData, path, "bad value in: " + line);
            }
            if (p.type == Type::kFloat32) {
              v = static_cast<float>(v);
            }
            e.scalars[i].push_back(v);
          }
        }
      }
    }
    return file;
  }

  const bool swap = (format == Format::kBinaryBig) != (std::endian::native == std::endian::big);
  BinaryReader reader(in, swap, path);
  for (Element& e : file.elements) {
    allocate(e);
    for (std::size_t row = 0; row < e.count; ++row) {
      for (std::size_t i = 0; i < e.properties.size(); ++i) {
        const Property& p = e.properties[i];
        if (p.is_list) {
          const double n = reader.read(p.count_type);
          if (n < 0) {
            throw ParseError(ParseErrorKind::kMalformedData, path, "negative list length");
          }
          std::vector<std::int64_t> items(static_cast<std::size_t>(n));
          for (auto& item : items) {
            item = static_cast<std::int64_t>(reader.read(p.type));
          }
          e.lists[i].push_back(std::move(items));
        } else {
          e.scalars[i].push_back(reader.read(p.type));
        }
      }
    }
  }
  return file;
}

}  // namespace peel::ply
