#pragma once

#include <functional>

namespace hl {

// Worker count used by parallel_for; 1 runs inline.
void set_threads(int n);
int threads();

// Runs f(i) for i in [0, n). Each index must write only its own output slot,
// so results do not depend on the thread count.
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace hl
