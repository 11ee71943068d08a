#ifndef lasich_lasich_hpp
#define lasich_lasich_hpp

#include "lasich/common.hpp"
#include "lasich/eval.hpp"
#include "lasich/hclust.hpp"
#include "lasich/io.hpp"
#include "lasich/kkt.hpp"
#include "lasich/matrix_set.hpp"
#include "lasich/model.hpp"
#include "lasich/network.hpp"
#include "lasich/screening.hpp"
#include "lasich/smallqp.hpp"
#include "lasich/solver.hpp"
#include "lasich/synth.hpp"

#endif
