#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "lantern/mask.hpp"
#include "lantern/volume.hpp"

namespace lantern {

// Volume container (.cvol / .cmask):
//
//   line 1   JSON header terminated by '\n', e.g.
//            {"byte_order":"little","dtype":"c128","nt":2,"nx":4,"ny":4}
//   rest     raw payload, little-endian. Complex dtypes interleave
//            (real, imag); "c64" uses float32 parts, "c128" float64.
//            Masks use dtype "u8", one byte per entry.
//
// Element order is x fastest, then y, then t.

/// Path could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header missing, not JSON, or missing/invalid fields.
class HeaderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Payload byte count disagrees with the header.
class PayloadSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ComplexDtype { C64, C128 };

template <typename Tag>
void save_volume(const std::filesystem::path& path, const BasicVolume<Tag>& volume,
                 ComplexDtype dtype = ComplexDtype::C128);

template <typename Tag>
BasicVolume<Tag> load_volume_as(const std::filesystem::path& path);

inline DynamicImage load_volume(const std::filesystem::path& path) {
  return load_volume_as<ImageDomain>(path);
}
inline KSpaceData load_kspace(const std::filesystem::path& path) {
  return load_volume_as<KSpaceDomain>(path);
}

void save_mask(const std::filesystem::path& path, const SamplingMask& mask);
SamplingMask load_mask(const std::filesystem::path& path);

/// Writes `frame` of |x| as 8-bit binary PGM, scaled so that `peak` maps to 255.
void write_pgm_frame(const std::filesystem::path& path, const DynamicImage& x, int frame,
                     double peak);

}  // namespace lantern
