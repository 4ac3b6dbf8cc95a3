#pragma once

#include <stdexcept>
#include <string>

namespace qcbr
{

/// Base of every error the library throws. `exit_code()` is what the CLI
/// returns when the error reaches `main`.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual int exit_code() const noexcept { return 2; }
};

/// Bad input: out-of-range parameters, malformed meshes, size mismatches.
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// Non-manifold edges, wrong boundary count, unsupported genus.
class TopologyError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

/// Zero-area faces or zero-length edges.
class DegeneracyError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

/// A Beltrami coefficient with modulus >= 1 where an admissible one is
/// required.
class InadmissibleError : public ValidationError
{
public:
    InadmissibleError(const std::string& msg, long face)
        : ValidationError(msg), face_(face)
    {
    }
    [[nodiscard]] long face() const noexcept { return face_; }

private:
    long face_;
};

/// Linear solver failures and map reconstruction failures.
class SolverError : public Error
{
public:
    using Error::Error;
    [[nodiscard]] int exit_code() const noexcept override { return 3; }
};

/// File I/O and container/OBJ/PGM format errors.
class FormatError : public Error
{
public:
    using Error::Error;
    [[nodiscard]] int exit_code() const noexcept override { return 4; }
};

}  // namespace qcbr
