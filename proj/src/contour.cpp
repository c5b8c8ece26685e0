#include <cdefl/contour.hpp>

#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cdefl
{

void ContourSpec::validate() const
{
  if (!(radius > 0.0))
    throw std::invalid_argument("contour radius must be positive");
  if (quad_order < 2)
    throw std::invalid_argument("contour quadrature order must be >= 2");
}

ContourSpec parse_contour(std::string const &text, int quad_order)
{
  std::istringstream in(text);
  std::string part;
  std::vector<Real> v;
  while (std::getline(in, part, ','))
  {
    try
    {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (part.find_first_not_of(" \t", used) != std::string::npos)
        throw std::invalid_argument("junk");
    }
    catch (std::logic_error const &)
    {
      throw std::invalid_argument("contour '" + text + "': expected c_re,c_im,r");
    }
  }
  if (v.size() != 3)
    throw std::invalid_argument("contour '" + text + "': expected c_re,c_im,r");
  ContourSpec spec{Complex(v[0], v[1]), v[2], quad_order};
  spec.validate();
  return spec;
}

std::string format_contour(ContourSpec const &spec)
{
  std::ostringstream out;
  out << std::setprecision(17) << spec.center.real() << ',' << spec.center.imag() << ','
      << spec.radius;
  return out.str();
}

} // namespace cdefl
