#pragma once

#include <stdexcept>
#include <string>

namespace segforge {

/// Invalid tensor shapes or arguments to a tensor operation.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bad or inconsistent configuration values; maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values where finite math is required (training halt).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem or OS-level I/O failure; message carries the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Base for dataset/sample file problems.
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// PNM header is not what we expect (bad magic, maxval, dimensions).
class MalformedFileError : public DatasetError {
public:
    using DatasetError::DatasetError;
};

/// File ended before the declared payload.
class TruncatedFileError : public DatasetError {
public:
    using DatasetError::DatasetError;
};

/// A mask pixel holds a class index outside [0, num_classes).
class MaskRangeError : public DatasetError {
public:
    using DatasetError::DatasetError;
};

} // namespace segforge
