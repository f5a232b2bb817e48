#include "lantern/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "byte_order.hpp"
#include "json.hpp"

namespace lantern {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

struct Container {
  json header;
  std::string_view payload;
};

Container split_container(const std::string& bytes, const std::filesystem::path& path) {
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) {
    throw HeaderError("'" + path.string() + "': missing header line");
  }
  Container c;
  try {
    c.header = json::parse(bytes.substr(0, newline));
  } catch (const json::exception& e) {
    throw HeaderError("'" + path.string() + "': malformed header: " + e.what());
  }
  if (!c.header.is_object()) throw HeaderError("'" + path.string() + "': header is not an object");
  c.payload = std::string_view(bytes).substr(newline + 1);
  return c;
}

Shape header_shape(const json& h, const std::filesystem::path& path) {
  Shape s;
  try {
    s.nx = h.at("nx").get<int>();
    s.ny = h.at("ny").get<int>();
    s.nt = h.at("nt").get<int>();
    if (h.at("byte_order").get<std::string>() != "little") {
      throw HeaderError("'" + path.string() + "': unsupported byte order");
    }
  } catch (const json::exception& e) {
    throw HeaderError("'" + path.string() + "': bad header field: " + e.what());
  }
  try {
    require_valid_shape(s);
  } catch (const ShapeError& e) {
    throw HeaderError("'" + path.string() + "': " + e.what());
  }
  return s;
}

json base_header(const Shape& s, const char* dtype) {
  json h;
  h["nx"] = s.nx;
  h["ny"] = s.ny;
  h["nt"] = s.nt;
  h["dtype"] = dtype;
  h["byte_order"] = "little";
  return h;
}

}  // namespace

template <typename Tag>
void save_volume(const std::filesystem::path& path, const BasicVolume<Tag>& volume,
                 ComplexDtype dtype) {
  const bool wide = dtype == ComplexDtype::C128;
  std::string bytes = base_header(volume.shape(), wide ? "c128" : "c64").dump();
  bytes.push_back('\n');
  bytes.reserve(bytes.size() + volume.size() * (wide ? 16 : 8));
  for (const auto& z : volume.values()) {
    if (wide) {
      detail::put_f64(bytes, z.real());
      detail::put_f64(bytes, z.imag());
    } else {
      detail::put_f32(bytes, static_cast<float>(z.real()));
      detail::put_f32(bytes, static_cast<float>(z.imag()));
    }
  }
  write_file(path, bytes);
}

template <typename Tag>
BasicVolume<Tag> load_volume_as(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto c = split_container(bytes, path);
  const Shape shape = header_shape(c.header, path);
  std::string dtype;
  try {
    dtype = c.header.at("dtype").get<std::string>();
  } catch (const json::exception& e) {
    throw HeaderError("'" + path.string() + "': bad header field: " + e.what());
  }
  std::size_t width = 0;
  if (dtype == "c128") {
    width = 8;
  } else if (dtype == "c64") {
    width = 4;
  } else {
    throw HeaderError("'" + path.string() + "': unsupported dtype '" + dtype + "' for a volume");
  }
  const std::size_t expected = shape.size() * 2 * width;
  if (c.payload.size() != expected) {
    throw PayloadSizeError("'" + path.string() + "': payload has " +
                           std::to_string(c.payload.size()) + " bytes, header implies " +
                           std::to_string(expected));
  }
  std::vector<Complex> data(shape.size());
  const char* p = c.payload.data();
  for (auto& z : data) {
    if (width == 8) {
      z = Complex(detail::get_f64(p), detail::get_f64(p + 8));
    } else {
      z = Complex(detail::get_f32(p), detail::get_f32(p + 4));
    }
    p += 2 * width;
  }
  return BasicVolume<Tag>(shape, std::move(data));
}

template void save_volume<ImageDomain>(const std::filesystem::path&, const DynamicImage&,
                                       ComplexDtype);
template void save_volume<KSpaceDomain>(const std::filesystem::path&, const KSpaceData&,
                                        ComplexDtype);
template DynamicImage load_volume_as<ImageDomain>(const std::filesystem::path&);
template KSpaceData load_volume_as<KSpaceDomain>(const std::filesystem::path&);

void save_mask(const std::filesystem::path& path, const SamplingMask& mask) {
  json h = base_header(mask.shape(), "u8");
  h["kind"] = to_string(mask.kind());
  h["target_accel"] = mask.target_accel();
  std::string bytes = h.dump();
  bytes.push_back('\n');
  bytes.append(mask.bits().begin(), mask.bits().end());
  write_file(path, bytes);
}

SamplingMask load_mask(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const auto c = split_container(bytes, path);
  const Shape shape = header_shape(c.header, path);
  MaskKind kind = MaskKind::Full;
  double accel = 1.0;
  try {
    if (c.header.at("dtype").get<std::string>() != "u8") {
      throw HeaderError("'" + path.string() + "': mask dtype must be u8");
    }
    kind = mask_kind_from_string(c.header.value("kind", std::string("full")));
    accel = c.header.value("target_accel", 1.0);
  } catch (const json::exception& e) {
    throw HeaderError("'" + path.string() + "': bad header field: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw HeaderError("'" + path.string() + "': " + e.what());
  }
  if (c.payload.size() != shape.size()) {
    throw PayloadSizeError("'" + path.string() + "': payload has " +
                           std::to_string(c.payload.size()) + " bytes, header implies " +
                           std::to_string(shape.size()));
  }
  std::vector<std::uint8_t> bits(c.payload.begin(), c.payload.end());
  if (std::any_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b > 1; })) {
    throw HeaderError("'" + path.string() + "': mask payload holds values other than 0/1");
  }
  return SamplingMask(shape, std::move(bits), kind, accel);
}

void write_pgm_frame(const std::filesystem::path& path, const DynamicImage& x, int frame,
                     double peak) {
  const Shape& s = x.shape();
  if (frame < 0 || frame >= s.nt) throw std::out_of_range("frame index out of range");
  std::string bytes = "P5\n" + std::to_string(s.nx) + " " + std::to_string(s.ny) + "\n255\n";
  const double scale = peak > 0.0 ? 255.0 / peak : 0.0;
  for (const auto& z : x.frame(frame)) {
    const double v = std::clamp(std::abs(z) * scale, 0.0, 255.0);
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
  }
  write_file(path, bytes);
}

}  // namespace lantern
