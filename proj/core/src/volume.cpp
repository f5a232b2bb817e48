#include "lantern/volume.hpp"

namespace lantern {

std::string to_string(const Shape& shape) {
  return "(" + std::to_string(shape.nx) + ", " + std::to_string(shape.ny) + ", " +
         std::to_string(shape.nt) + ")";
}

void require_valid_shape(const Shape& shape) {
  if (shape.nx < 2 || shape.ny < 2 || shape.nt < 1) {
    throw ShapeError("invalid volume shape " + to_string(shape) +
                     "; need nx >= 2, ny >= 2, nt >= 1");
  }
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a) + " vs " +
                     to_string(b));
  }
}

std::vector<double> magnitude(const DynamicImage& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::abs(x[i]);
  return out;
}

}  // namespace lantern
