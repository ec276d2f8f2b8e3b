#pragma once

#include "evidentia/bn.hpp"
#include "evidentia/ceg.hpp"
#include "evidentia/corpus.hpp"
#include "evidentia/dot.hpp"
#include "evidentia/enumeration.hpp"
#include "evidentia/error.hpp"
#include "evidentia/factor.hpp"
#include "evidentia/graph.hpp"
#include "evidentia/junction_tree.hpp"
#include "evidentia/oobn.hpp"
#include "evidentia/service.hpp"
#include "evidentia/wigmore.hpp"
