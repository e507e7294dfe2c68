#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace naifs {

/// Evidence that d_{w,n}(x, y) > delta whenever d(x, y) >= gamma and n >= k0(gamma).
struct ExpansivityCertificate {
    double delta = 0.0;
    std::vector<std::pair<double, std::size_t>> gamma_table;  // (gamma, k0)
    std::string method;                                       // "analytic" or "empirical scan"
    std::uint64_t system_hash = 0;
    bool expansive = false;
    std::optional<std::string> counterexample;
    std::vector<std::string> notes;
};

} // namespace naifs
