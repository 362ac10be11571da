#include "ebl/version.hpp"

namespace ebl {

const char* library_version() { return EBL_VERSION_STRING; }

}  // namespace ebl
