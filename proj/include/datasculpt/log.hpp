#pragma once

#include <spdlog/spdlog.h>

namespace datasculpt {

// Installs the stderr logger; level comes from DATASCULPT_LOG
// (error, warn, info, debug), default warn.
void init_logging();

}  // namespace datasculpt
