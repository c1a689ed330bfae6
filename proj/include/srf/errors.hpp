#pragma once

#include <stdexcept>
#include <string>

namespace srf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration values (grid size, slopes, step controls, config files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. combining fields that live on different grids.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a failed dense solve.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A potential whose density D = 1 + H0[phi] is not positive.
class InadmissibleError : public Error {
 public:
  InadmissibleError(const std::string& msg, double where, double min_density)
      : Error(msg), location_(where), min_density_(min_density) {}

  double location() const { return location_; }
  double min_density() const { return min_density_; }

 private:
  double location_;
  double min_density_;
};

/// The time integrator could not advance the state above dt_min.
class StiffFailure : public Error {
 public:
  StiffFailure(const std::string& msg, double t, double dt)
      : Error(msg), t_(t), dt_(dt) {}
  double time() const { return t_; }
  double last_dt() const { return dt_; }

 private:
  double t_;
  double dt_;
};

class FitUnavailable : public Error {
 public:
  using Error::Error;
};

class RenormalizationUnavailable : public Error {
 public:
  using Error::Error;
};

/// Newton failed along the continuity path; carries the last accepted parameter.
class PathTermination : public Error {
 public:
  PathTermination(const std::string& msg, double last_good_t)
      : Error(msg), last_good_t_(last_good_t) {}
  double last_good_t() const { return last_good_t_; }

 private:
  double last_good_t_;
};

}  // namespace srf
