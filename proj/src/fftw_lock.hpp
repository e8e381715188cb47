#pragma once

#include <mutex>

namespace mzlab::detail {

/// FFTW's planner is not re-entrant; every plan creation takes this lock.
std::mutex& fftw_planner_mutex();

}  // namespace mzlab::detail
