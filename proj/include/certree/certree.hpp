#pragma once

#include "certree/bitvec.hpp"
#include "certree/bounds.hpp"
#include "certree/caches.hpp"
#include "certree/dataset.hpp"
#include "certree/errors.hpp"
#include "certree/greedy.hpp"
#include "certree/model_io.hpp"
#include "certree/oracle.hpp"
#include "certree/rational.hpp"
#include "certree/scheduler.hpp"
#include "certree/search.hpp"
#include "certree/tree.hpp"
