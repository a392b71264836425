#pragma once

#include <cstddef>
#include <string>

#include <nlohmann/json.hpp>

#include "amalgam/distribution.hpp"
#include "amalgam/error.hpp"
#include "amalgam/matrix.hpp"
#include "amalgam/tensor.hpp"

namespace amalgam {

using Json = nlohmann::json;

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::Parse, "complex numbers are [re, im] pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

/// Row-major (output coordinate, insertion coordinates) list of [re, im] pairs.
inline Json tensor_to_json(const MultilinearTensor& t) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < t.size(); ++i) arr.push_back(complex_to_json(t.data()[i]));
  return arr;
}

inline MultilinearTensor tensor_from_json(const Json& j, std::size_t d, std::size_t order) {
  if (!j.is_array()) throw Error(ErrorCode::Parse, "tensor must be an array");
  MultilinearTensor t(d, order);
  if (j.size() != t.size()) throw Error(ErrorCode::Parse, "tensor has the wrong number of entries");
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = complex_from_json(j[i]);
  return t;
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.dim(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const BDist& dist) {
  Json moments = Json::object();
  for (std::size_t n = 1; n <= dist.order; ++n) moments[std::to_string(n)] = tensor_to_json(dist.moments[n - 1]);
  return {{"kind", "bdist"}, {"d", dist.d}, {"N", dist.order}, {"norm_bound", dist.norm_bound}, {"moments", moments}};
}

inline Json to_json(const JointBDist& j) {
  Json moments = Json::object();
  for (std::size_t n = 1; n <= j.order; ++n)
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask)
      moments[Word{n, mask}.key()] = tensor_to_json(j.words[n - 1][mask]);
  return {{"kind", "joint_bdist"},
          {"d", j.d},
          {"N", j.order},
          {"norm_bound", Json::array({j.norm_bound_1, j.norm_bound_2})},
          {"moments", moments}};
}

namespace detail {

template <class F>
auto parse_guard(F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

}  // namespace detail

inline BDist bdist_from_json(const Json& j) {
  return detail::parse_guard([&] {
    BDist dist{j.at("d").get<std::size_t>(), j.at("N").get<std::size_t>(), j.at("norm_bound").get<double>(), {}};
    const Json& m = j.at("moments");
    for (std::size_t n = 1; n <= dist.order; ++n)
      dist.moments.push_back(tensor_from_json(m.at(std::to_string(n)), dist.d, n));
    dist.validate();
    return dist;
  });
}

inline JointBDist joint_from_json(const Json& j) {
  return detail::parse_guard([&] {
    const Json& nb = j.at("norm_bound");
    JointBDist out{j.at("d").get<std::size_t>(), j.at("N").get<std::size_t>(), nb.at(0).get<double>(),
                   nb.at(1).get<double>(), {}};
    const Json& m = j.at("moments");
    for (std::size_t n = 1; n <= out.order; ++n) {
      std::vector<MultilinearTensor> table;
      for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask)
        table.push_back(tensor_from_json(m.at(Word{n, mask}.key()), out.d, n));
      out.words.push_back(std::move(table));
    }
    out.validate();
    return out;
  });
}

}  // namespace amalgam
