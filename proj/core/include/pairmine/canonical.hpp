#pragma once

#include <string>

namespace pairmine {

/// Quantizes to 9 significant decimal digits, returning the double that the
/// serialized form parses back to. Idempotent; every decimal the manifest
/// and pose-script writers emit passes through this.
double round9(double value);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_now_iso8601();

}  // namespace pairmine
