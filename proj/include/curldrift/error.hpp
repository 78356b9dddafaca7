// Copyright curldrift contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curldrift
{

class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Invalid configuration or argument outside its documented range.
class ConfigError : public Error
{
  public:
    explicit ConfigError(std::string const& what, std::string key = {})
        : Error(what), key_(std::move(key))
    {
    }

    //! Offending configuration key, empty for plain argument errors
    std::string const& key() const noexcept { return key_; }

  private:
    std::string key_;
};

class NumericError : public Error
{
  public:
    using Error::Error;
};

//! Adaptive quadrature stopped before reaching its tolerance.
class QuadratureError : public NumericError
{
  public:
    QuadratureError(std::string const& what, double estimate, double abs_error)
        : NumericError(what + " (estimate " + std::to_string(estimate)
                       + ", achieved error " + std::to_string(abs_error)
                       + ")")
        , estimate_(estimate)
        , abs_error_(abs_error)
    {
    }

    double estimate() const noexcept { return estimate_; }
    double abs_error() const noexcept { return abs_error_; }

  private:
    double estimate_;
    double abs_error_;
};

class ReplicaFailure : public Error
{
  public:
    ReplicaFailure(std::string const& what, std::size_t invalid, std::size_t total)
        : Error(what), invalid_(invalid), total_(total)
    {
    }

    std::size_t invalid() const noexcept { return invalid_; }
    std::size_t total() const noexcept { return total_; }

  private:
    std::size_t invalid_;
    std::size_t total_;
};

}  // namespace curldrift
