#pragma once

#include <stdexcept>
#include <string>

namespace sve {

// A mu-integral could not be certified finite (the weighted-mass assumption
// on the kernel fails, or a tail correction is too uncertain to trust).
class divergence_error : public std::runtime_error {
public:
    divergence_error(std::string integral, std::string reason)
        : std::runtime_error("divergent integral '" + integral + "': " + reason),
          integral_(std::move(integral)),
          reason_(std::move(reason)) {}

    const std::string& integral() const noexcept { return integral_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string integral_;
    std::string reason_;
};

// Schedule construction refused because the kernel/coefficient balance
// condition does not hold; names the violated liminf.
class schedule_refusal : public std::runtime_error {
public:
    explicit schedule_refusal(std::string violated)
        : std::runtime_error("schedule refused: " + violated),
          violated_(std::move(violated)) {}

    const std::string& violated_condition() const noexcept { return violated_; }

private:
    std::string violated_;
};

// Invalid configuration input; carries the offending field name.
class config_error : public std::runtime_error {
public:
    config_error(std::string field, const std::string& message)
        : std::runtime_error("config field '" + field + "': " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace sve
