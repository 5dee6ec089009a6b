#include "lradi/lowrank.hpp"

namespace lradi {

bool compression_due(int additions_since_compress, Index z, Index n) {
  return additions_since_compress >= 10 || 2 * z >= n;
}

}  // namespace lradi
