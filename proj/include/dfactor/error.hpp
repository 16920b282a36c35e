#pragma once

#include <stdexcept>
#include <string>

namespace dfactor {

/// Broad failure class. The CLI maps these onto exit codes 1/2/3.
enum class ErrorKind { config, data, numerical };

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::config:
        return 1;
    case ErrorKind::data:
        return 2;
    case ErrorKind::numerical:
        return 3;
    }
    return 3;
}

} // namespace dfactor
