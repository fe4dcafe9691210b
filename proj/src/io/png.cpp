#include "partrep/io/png.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace partrep::io {

namespace {

void put_u32_be(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

uint32_t get_u32_be(const unsigned char* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

void append_chunk(std::string& out, const char type[4], const std::string& data) {
  put_u32_be(out, static_cast<uint32_t>(data.size()));
  size_t crc_start = out.size();
  out.append(type, 4);
  out.append(data);
  uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(out.data() + crc_start),
                    static_cast<uInt>(out.size() - crc_start));
  put_u32_be(out, static_cast<uint32_t>(crc));
}

void write_png(const std::string& path, int w, int h, int channels, const uint8_t* pixels) {
  std::string ihdr;
  put_u32_be(ihdr, static_cast<uint32_t>(w));
  put_u32_be(ihdr, static_cast<uint32_t>(h));
  ihdr.push_back(8);                                   // bit depth
  ihdr.push_back(channels == 3 ? char(2) : char(0));   // color type
  ihdr.push_back(0);                                   // compression
  ihdr.push_back(0);                                   // filter
  ihdr.push_back(0);                                   // interlace

  size_t stride = static_cast<size_t>(w) * channels;
  std::string raw;
  raw.reserve((stride + 1) * h);
  for (int y = 0; y < h; ++y) {
    raw.push_back(0);  // filter type none
    raw.append(reinterpret_cast<const char*>(pixels + y * stride), stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string idat(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(idat.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw std::runtime_error("png: deflate failed for " + path);
  idat.resize(bound);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", idat);
  append_chunk(out, "IEND", "");

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("png: cannot open for write: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("png: write failed: " + path);
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

void unfilter(std::vector<uint8_t>& raw, int h, size_t stride, int bpp) {
  std::vector<uint8_t> prev(stride, 0);
  for (int y = 0; y < h; ++y) {
    uint8_t* row = raw.data() + static_cast<size_t>(y) * (stride + 1);
    int filter = row[0];
    uint8_t* cur = row + 1;
    for (size_t x = 0; x < stride; ++x) {
      int a = x >= static_cast<size_t>(bpp) ? cur[x - bpp] : 0;
      int b = prev[x];
      int c = x >= static_cast<size_t>(bpp) ? prev[x - bpp] : 0;
      int v = cur[x];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: throw std::runtime_error("png: unsupported filter type");
      }
      cur[x] = static_cast<uint8_t>(v & 0xff);
    }
    std::memcpy(prev.data(), cur, stride);
  }
}

}  // namespace

void write_png_rgb(const std::string& path, const RgbImage& img) {
  write_png(path, img.w, img.h, 3, img.pixels.data());
}

void write_png_gray(const std::string& path, const GrayImage& img) {
  write_png(path, img.w, img.h, 1, img.pixels.data());
}

RgbImage read_png_rgb(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("png: cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "\x89PNG\r\n\x1a\n", 8) != 0)
    throw std::runtime_error("png: bad signature: " + path);

  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  size_t pos = 8, size = bytes.size();
  int w = 0, h = 0, channels = 0;
  std::string idat;
  while (pos + 8 <= size) {
    uint32_t len = get_u32_be(p + pos);
    const char* type = bytes.data() + pos + 4;
    if (pos + 12 + len > size) throw std::runtime_error("png: truncated chunk: " + path);
    const unsigned char* data = p + pos + 8;
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw std::runtime_error("png: bad IHDR: " + path);
      w = static_cast<int>(get_u32_be(data));
      h = static_cast<int>(get_u32_be(data + 4));
      int depth = data[8], color = data[9], interlace = data[12];
      if (depth != 8 || interlace != 0 || (color != 0 && color != 2))
        throw std::runtime_error("png: only 8-bit gray/RGB non-interlaced supported: " + path);
      channels = color == 2 ? 3 : 1;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.append(reinterpret_cast<const char*>(data), len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (w <= 0 || h <= 0 || channels == 0 || idat.empty())
    throw std::runtime_error("png: missing IHDR/IDAT: " + path);

  size_t stride = static_cast<size_t>(w) * channels;
  std::vector<uint8_t> raw((stride + 1) * h);
  uLongf raw_len = static_cast<uLongf>(raw.size());
  int zr = uncompress(raw.data(), &raw_len, reinterpret_cast<const Bytef*>(idat.data()),
                      static_cast<uLong>(idat.size()));
  if (zr != Z_OK || raw_len != raw.size())
    throw std::runtime_error("png: inflate failed: " + path);
  unfilter(raw, h, stride, channels);

  RgbImage img = RgbImage::black(h, w);
  for (int y = 0; y < h; ++y) {
    const uint8_t* row = raw.data() + static_cast<size_t>(y) * (stride + 1) + 1;
    for (int x = 0; x < w; ++x) {
      if (channels == 3) {
        img.at(y, x, 0) = row[x * 3];
        img.at(y, x, 1) = row[x * 3 + 1];
        img.at(y, x, 2) = row[x * 3 + 2];
      } else {
        img.at(y, x, 0) = img.at(y, x, 1) = img.at(y, x, 2) = row[x];
      }
    }
  }
  return img;
}

}  // namespace partrep::io
