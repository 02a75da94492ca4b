#ifndef ICE_ICE_HPP_
#define ICE_ICE_HPP_

#include "association.hpp"
#include "common.hpp"
#include "data.hpp"
#include "evaluation.hpp"
#include "framework.hpp"
#include "graphcluster.hpp"
#include "inference.hpp"
#include "learners.hpp"

#endif
