// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpvortex/field.hpp"

namespace gpv {

// FieldFile layout, no padding anywhere:
//   bytes 0-3   ASCII magic "GPF1"
//   bytes 4-7   little-endian u32 header length H
//   bytes 8..   H bytes of UTF-8 JSON:
//               {"nx":int,"ny":int,"Lx":float,"Ly":float,
//                "kind":"real"|"complex","layout":"row-major-x1-fastest"}
//   payload     little-endian float64 samples, complex interleaved (re, im)

namespace fieldfile {

constexpr char kMagic[4] = {'G', 'P', 'F', '1'};
constexpr const char* kLayout = "row-major-x1-fastest";

struct Header {
  GridSpec grid;
  bool complex = false;
};

inline std::string header_json(const GridSpec& g, bool complex_kind) {
  nlohmann::ordered_json j;
  j["nx"] = g.nx;
  j["ny"] = g.ny;
  j["Lx"] = g.Lx;
  j["Ly"] = g.Ly;
  j["kind"] = complex_kind ? "complex" : "real";
  j["layout"] = kLayout;
  return j.dump();
}

inline void write_raw(const std::filesystem::path& path, const GridSpec& g,
                      bool complex_kind, const double* payload, std::size_t count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  const std::string header = header_json(g, complex_kind);
  const std::uint32_t hlen = static_cast<std::uint32_t>(header.size());
  char lenbuf[4] = {static_cast<char>(hlen & 0xff), static_cast<char>((hlen >> 8) & 0xff),
                    static_cast<char>((hlen >> 16) & 0xff),
                    static_cast<char>((hlen >> 24) & 0xff)};
  out.write(kMagic, 4);
  out.write(lenbuf, 4);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  static_assert(sizeof(double) == 8);
  out.write(reinterpret_cast<const char*>(payload),
            static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw FormatError("short write to '" + path.string() + "'");
}

inline Header read_header(std::ifstream& in, const std::string& name) {
  char magic[4];
  if (!in.read(magic, 4)) throw FormatError(name + ": truncated before magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError(name + ": bad magic '" + std::string(magic, 4) + "' (expected GPF1)");
  unsigned char lenbuf[4];
  if (!in.read(reinterpret_cast<char*>(lenbuf), 4))
    throw FormatError(name + ": truncated header length");
  const std::uint32_t hlen = static_cast<std::uint32_t>(lenbuf[0]) |
                             (static_cast<std::uint32_t>(lenbuf[1]) << 8) |
                             (static_cast<std::uint32_t>(lenbuf[2]) << 16) |
                             (static_cast<std::uint32_t>(lenbuf[3]) << 24);
  std::string header(hlen, '\0');
  if (!in.read(header.data(), hlen)) throw FormatError(name + ": truncated JSON header");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(name + ": unparsable JSON header: " + e.what());
  }
  Header h;
  try {
    h.grid = GridSpec(j.at("nx").get<int>(), j.at("ny").get<int>(),
                      j.at("Lx").get<double>(), j.at("Ly").get<double>());
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "complex")
      h.complex = true;
    else if (kind == "real")
      h.complex = false;
    else
      throw FormatError(name + ": unknown kind '" + kind + "'");
    if (j.at("layout").get<std::string>() != kLayout)
      throw FormatError(name + ": unsupported layout");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(name + ": header missing fields: " + e.what());
  }
  return h;
}

inline std::vector<double> read_payload(std::ifstream& in, const std::string& name,
                                        std::size_t count) {
  std::vector<double> payload(count);
  if (!in.read(reinterpret_cast<char*>(payload.data()),
               static_cast<std::streamsize>(count * sizeof(double))))
    throw FormatError(name + ": truncated payload (expected " + std::to_string(count) +
                      " float64 values)");
  return payload;
}

} // namespace fieldfile

inline void write_field(const RealField& f, const std::filesystem::path& path) {
  require_finite(f, "write_field");
  fieldfile::write_raw(path, f.grid, false, f.values.data(), f.size());
}

inline void write_field(const ComplexField& f, const std::filesystem::path& path) {
  require_finite(f, "write_field");
  fieldfile::write_raw(path, f.grid, true,
                       reinterpret_cast<const double*>(f.values.data()), 2 * f.size());
}

inline fieldfile::Header peek_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return fieldfile::read_header(in, path.string());
}

inline RealField read_real_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  auto h = fieldfile::read_header(in, path.string());
  if (h.complex)
    throw FormatError(path.string() + ": kind mismatch, file holds complex samples");
  auto payload = fieldfile::read_payload(in, path.string(), h.grid.size());
  return RealField(h.grid, std::move(payload));
}

inline ComplexField read_complex_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  auto h = fieldfile::read_header(in, path.string());
  if (!h.complex)
    throw FormatError(path.string() + ": kind mismatch, file holds real samples");
  auto payload = fieldfile::read_payload(in, path.string(), 2 * h.grid.size());
  ComplexField f(h.grid);
  std::memcpy(f.values.data(), payload.data(), payload.size() * sizeof(double));
  return f;
}

} // namespace gpv
