#pragma once

// Binary checkpoint container shared by the segmentation and survival models.
// Layout: 8-byte magic, little-endian u32 header length, JSON header, then the
// raw float32 payload of every parameter in header order. Readers validate the
// magic and per-parameter sizes, so a truncated or mismatched file fails loudly.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "glioseg/volume.hpp"

namespace glioseg::detail {

using ParamBlob = std::pair<std::string, const std::vector<float>*>;

inline void write_checkpoint(const std::filesystem::path& path, const char magic[8],
                             nlohmann::json header, const std::vector<ParamBlob>& params) {
  nlohmann::json plist = nlohmann::json::array();
  for (const auto& [name, values] : params)
    plist.push_back({{"name", name}, {"size", values->size()}});
  header["params"] = std::move(plist);

  const std::string htext = header.dump();
  if (htext.size() > 0xffffffffu) throw DataError("checkpoint header too large");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path.string());
  out.write(magic, 8);
  const std::uint32_t hlen = static_cast<std::uint32_t>(htext.size());
  char lenbuf[4] = {static_cast<char>(hlen & 0xff), static_cast<char>((hlen >> 8) & 0xff),
                    static_cast<char>((hlen >> 16) & 0xff), static_cast<char>((hlen >> 24) & 0xff)};
  out.write(lenbuf, 4);
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const auto& [name, values] : params)
    out.write(reinterpret_cast<const char*>(values->data()),
              static_cast<std::streamsize>(values->size() * sizeof(float)));
  if (!out) throw DataError("checkpoint write failed: " + path.string());
}

struct LoadedCheckpoint {
  nlohmann::json header;
  std::vector<std::pair<std::string, std::vector<float>>> params;
};

inline LoadedCheckpoint read_checkpoint(const std::filesystem::path& path, const char magic[8]) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());

  char got[8];
  in.read(got, 8);
  if (!in || std::memcmp(got, magic, 8) != 0)
    throw DataError("not a recognized checkpoint: " + path.string());

  char lenbuf[4];
  in.read(lenbuf, 4);
  if (!in) throw DataError("truncated checkpoint: " + path.string());
  const std::uint32_t hlen = static_cast<std::uint32_t>(static_cast<unsigned char>(lenbuf[0])) |
                             (static_cast<std::uint32_t>(static_cast<unsigned char>(lenbuf[1])) << 8) |
                             (static_cast<std::uint32_t>(static_cast<unsigned char>(lenbuf[2])) << 16) |
                             (static_cast<std::uint32_t>(static_cast<unsigned char>(lenbuf[3])) << 24);

  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw DataError("truncated checkpoint header: " + path.string());

  LoadedCheckpoint ck;
  try {
    ck.header = nlohmann::json::parse(htext);
  } catch (const nlohmann::json::exception&) {
    throw DataError("malformed checkpoint header: " + path.string());
  }
  if (!ck.header.contains("params") || !ck.header["params"].is_array())
    throw DataError("checkpoint header missing parameter list: " + path.string());

  for (const auto& entry : ck.header["params"]) {
    const std::string name = entry.at("name").get<std::string>();
    const std::size_t size = entry.at("size").get<std::size_t>();
    std::vector<float> values(size);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(size * sizeof(float)));
    if (!in) throw DataError("truncated checkpoint payload: " + path.string());
    ck.params.emplace_back(name, std::move(values));
  }
  return ck;
}

}  // namespace glioseg::detail
