#include <cstdlib>
#include <string>

#include "driftsel/kernels.hpp"

namespace driftsel::kernels {

namespace detail {
#ifndef DRIFTSEL_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif
#ifndef DRIFTSEL_HAVE_NEON
const KernelTable* neon_table() { return nullptr; }
#endif
}  // namespace detail

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &scalar_table();
    case Isa::avx2:
      return detail::avx2_table();
    case Isa::neon:
      return detail::neon_table();
  }
  return nullptr;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

namespace {

const KernelTable& select_table() {
  if (const char* forced = std::getenv("DRIFTSEL_ISA")) {
    const std::string name(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (name == isa_name(isa)) {
        if (const KernelTable* table = table_for(isa)) return *table;
      }
    }
  }
  if (const KernelTable* table = detail::avx2_table()) return *table;
  if (const KernelTable* table = detail::neon_table()) return *table;
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select_table();
  return table;
}

}  // namespace driftsel::kernels
