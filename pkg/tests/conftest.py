# conftest.py - ftc-dim 테스트 공용 픽스처
# 내장 예제 모델과 탐색 결과를 세션 단위로 재사용

import math
from pathlib import Path

import numpy as np
import pytest

from dimension import assemble_matrix, solve_dimension
from ftc_core import explore_types
from model_io import preset

GOLDEN_DIR = Path(__file__).parent / "golden"

LOG3_LOG2 = math.log(3) / math.log(2)
TORUS_ALPHA = math.log(2 + math.sqrt(2)) / math.log(2)
# 황금 개스킷: 첫 검증 실행에서 고정한 값
GOLDEN_TYPES = 7
GOLDEN_FIXPOINT_LEVEL = 4
GOLDEN_ALPHA = 1.68239198183528

# 동등 분할 전의 12타입 토러스 0/1 행렬
PRINTED_TORUS_MATRIX = np.array([
    [0, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 1, 1, 1, 0, 0, 0, 0],
    [0, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0],
    [0, 1, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0],
    [1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0],
    [1, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 1],
    [0, 1, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0],
    [0, 1, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0],
    [1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1],
    [1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1],
])
TORUS_PARTITION = [[0], [1], [2], [3, 8, 9], [4], [5], [6, 10, 11], [7]]


@pytest.fixture(scope="session")
def sierpinski():
    return preset("sierpinski")


@pytest.fixture(scope="session")
def torus():
    return preset("torus_gifs")


@pytest.fixture(scope="session")
def golden():
    return preset("golden_gasket")


@pytest.fixture(scope="session")
def cantor():
    return preset("cantor_interval")


@pytest.fixture(scope="session")
def sierpinski_automaton(sierpinski):
    return explore_types(sierpinski.directed(), sierpinski.rule)


@pytest.fixture(scope="session")
def torus_automaton(torus):
    return explore_types(torus.directed(), torus.rule)


@pytest.fixture(scope="session")
def golden_automaton(golden):
    return explore_types(golden.directed(), golden.rule)


@pytest.fixture(scope="session")
def torus_dimension(torus_automaton):
    return solve_dimension(assemble_matrix(torus_automaton), space_dim=2)


@pytest.fixture(scope="session")
def sierpinski_dimension(sierpinski_automaton):
    return solve_dimension(assemble_matrix(sierpinski_automaton), space_dim=2)
