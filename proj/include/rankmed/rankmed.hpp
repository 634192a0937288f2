#pragma once

#include "rankmed/compensation.hpp"
#include "rankmed/dataset.hpp"
#include "rankmed/digest.hpp"
#include "rankmed/error.hpp"
#include "rankmed/evaluate.hpp"
#include "rankmed/feature_matrix.hpp"
#include "rankmed/pipeline.hpp"
#include "rankmed/rank.hpp"
#include "rankmed/redundancy.hpp"
#include "rankmed/relevance.hpp"
#include "rankmed/version.hpp"
