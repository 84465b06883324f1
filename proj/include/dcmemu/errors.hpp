#pragma once

#include <stdexcept>

namespace dcmemu {

// Error taxonomy mirrors the CLI exit codes: validation problems exit 1,
// numeric failures exit 2, filesystem failures exit 3. Bad arguments to
// individual operations throw std::domain_error (also exit 1).

struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_overflow_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace dcmemu
