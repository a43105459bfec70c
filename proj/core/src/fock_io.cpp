#include <iomanip>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "herald/fock.hpp"

namespace herald {

std::string to_json(const DensityMatrix& rho) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (int i = 0; i < rho.dim(); ++i) {
    nlohmann::json re_row = nlohmann::json::array();
    nlohmann::json im_row = nlohmann::json::array();
    for (int j = 0; j < rho.dim(); ++j) {
      re_row.push_back(rho(i, j).real());
      im_row.push_back(rho(i, j).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  nlohmann::json doc = {{"n_max", rho.n_max()}, {"re", std::move(re)}, {"im", std::move(im)}};
  return doc.dump(2);
}

DensityMatrix density_matrix_from_json(std::string_view text, Validation check) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("density matrix JSON: ") + e.what());
  }
  if (!doc.contains("n_max") || !doc.contains("re") || !doc.contains("im")) {
    throw std::invalid_argument("density matrix JSON needs n_max, re and im");
  }
  const int n_max = doc.at("n_max").get<int>();
  if (n_max < 0) throw std::invalid_argument("density matrix JSON: negative n_max");
  const int d = n_max + 1;
  const auto& re = doc.at("re");
  const auto& im = doc.at("im");
  if (!re.is_array() || !im.is_array() || static_cast<int>(re.size()) != d || static_cast<int>(im.size()) != d) {
    throw std::invalid_argument("density matrix JSON: expected " + std::to_string(d) + " rows");
  }
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(re[i].size()) != d || static_cast<int>(im[i].size()) != d) {
      throw std::invalid_argument("density matrix JSON: row " + std::to_string(i) + " has wrong length");
    }
    for (int j = 0; j < d; ++j) m(i, j) = Complex(re[i][j].get<double>(), im[i][j].get<double>());
  }
  return DensityMatrix::from_matrix(std::move(m), check);
}

void write_wigner_csv(std::ostream& out, const WignerGrid& grid) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "x\\p";
  for (double p : grid.p_axis) out << ',' << p;
  out << '\n';
  for (std::size_t i = 0; i < grid.x_axis.size(); ++i) {
    out << grid.x_axis[i];
    for (std::size_t j = 0; j < grid.p_axis.size(); ++j) {
      out << ',' << grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace herald
