#ifndef AMC_ERRORS_HPP
#define AMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace amc {

// Invalid configuration or usage (maps to CLI exit code 2).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Training diverged (non-finite parameters); carries the epoch it happened in.
class training_error : public std::runtime_error {
public:
    training_error(const std::string& what, int epoch)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

// A metric is requested on a class with no samples behind it.
class undefined_class_error : public std::runtime_error {
public:
    explicit undefined_class_error(const std::string& what) : std::runtime_error(what) {}
};

enum class io_errc {
    bad_magic,
    bad_version,
    truncated,
    bad_dimension,
    io_failed,
};

class io_error : public std::runtime_error {
public:
    io_error(io_errc kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    io_errc kind() const { return kind_; }

private:
    io_errc kind_;
};

} // namespace amc

#endif // AMC_ERRORS_HPP
