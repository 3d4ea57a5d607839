#pragma once

#include <stdexcept>
#include <string>

namespace gridhub {

/// Outcome class an error belongs to; the CLI maps these to exit codes.
enum class ErrorClass {
    Parse,        // malformed input text/format
    Validation,   // structurally readable but semantically invalid
    Convergence,  // solver failed to converge
    Io,           // filesystem trouble
};

class Error : public std::runtime_error {
  public:
    Error(ErrorClass cls, std::string message)
        : std::runtime_error(std::move(message)), cls_(cls) {}

    ErrorClass cls() const { return cls_; }

  private:
    ErrorClass cls_;
};

/// Located error in a sheet, script, or report file.
class ParseError : public Error {
  public:
    ParseError(std::string file, long line, long column, const std::string& message)
        : Error(ErrorClass::Parse, locate(file, line, column) + message),
          file_(std::move(file)), line_(line), column_(column) {}

    const std::string& file() const { return file_; }
    long line() const { return line_; }
    long column() const { return column_; }

  private:
    static std::string locate(const std::string& file, long line, long column) {
        std::string s = file.empty() ? std::string() : file + ":";
        if (line >= 0) s += std::to_string(line) + ":";
        if (column >= 0) s += std::to_string(column) + ":";
        if (!s.empty()) s += " ";
        return s;
    }

    std::string file_;
    long line_;
    long column_;
};

class ValidationError : public Error {
  public:
    explicit ValidationError(std::string message)
        : Error(ErrorClass::Validation, std::move(message)) {}
};

class ConvergenceError : public Error {
  public:
    ConvergenceError(int iterations, double mismatch_pu, std::string message)
        : Error(ErrorClass::Convergence, std::move(message)),
          iterations_(iterations), mismatch_pu_(mismatch_pu) {}

    int iterations() const { return iterations_; }
    double mismatch_pu() const { return mismatch_pu_; }

  private:
    int iterations_;
    double mismatch_pu_;
};

class IoError : public Error {
  public:
    explicit IoError(std::string message) : Error(ErrorClass::Io, std::move(message)) {}
};

}  // namespace gridhub
