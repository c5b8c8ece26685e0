#ifndef CDEFL_CONTOUR_HPP
#define CDEFL_CONTOUR_HPP

#include <cdefl/sparse.hpp>

#include <string>

namespace cdefl
{

/// Circle D(center, radius) traversed counter-clockwise, with the number
/// of Gauss-Legendre points used to discretize it.
struct ContourSpec
{
  Complex center{0.0, 0.0};
  Real radius = 1.0;
  int quad_order = 128;

  void validate() const;
  bool inside(Complex z) const { return std::abs(z - center) < radius; }
  /// Distance of z from the circle, relative to the radius.
  Real boundary_distance(Complex z) const
  {
    return std::abs(std::abs(z - center) - radius) / radius;
  }
};

/// Parses "c_re,c_im,r" (for example "0,0,5" or "-1,0,1").
ContourSpec parse_contour(std::string const &text, int quad_order = 128);
std::string format_contour(ContourSpec const &spec);

} // namespace cdefl

#endif
