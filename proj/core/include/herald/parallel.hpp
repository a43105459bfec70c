#pragma once

namespace herald {

// Worker threads used by parallel regions (trace synthesis, likelihood
// reductions). Results never depend on this value.
void set_thread_count(int n);
int thread_count();

}  // namespace herald
