#pragma once

namespace ebl {

/// Library version, "major.minor.patch".
const char* library_version();

}  // namespace ebl
