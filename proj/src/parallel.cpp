#include "ehrcsd/parallel.hpp"

#include <omp.h>

namespace ehrcsd {

int max_threads() { return omp_get_max_threads(); }

} // namespace ehrcsd
