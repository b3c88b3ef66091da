#!/usr/bin/env python3
"""
Backend and check registries.

Every built-in chart space and every check id the suite understands is
declared here as plain data. Runtime code looks entries up by name and
never hard-codes backend details.
"""

# Tolerances
FAMILY_TOLERANCES = {
    'trig': 1e-9,   # all-periodic trapezoid, spectral floor
    'bump': 1e-6,   # gauss-legendre on compactly supported fields
}
EXACT_TOLERANCE = 1e-12
SATURATION_FLOOR = 1e-13
PERIODIC_RUNG_TOLERANCE = 1e-10
MIN_ORDER = 2.0         # fitted refinement order required on bounded charts
ADMISSIBILITY_TOLERANCE = 1e-9
WITNESS_GAP = 1e-3
WITNESS_MIN_AREA = 1e-6

DEFAULT_MAX_ATOMS = 8
DEFAULT_DRAWS = 20
MIN_RESOLUTION = 8
MAX_DIM = 3

QUADRATURE_RULES = ['equispaced', 'gauss-legendre']
REPORT_FORMATS = ['text', 'csv', 'json']


# Chart spaces
BACKENDS = {
    'euclidean': {
        'description': 'Flat unweighted square [-1,1]^2 with compactly supported fields.',
        'dim': 2,
        'coords': ['x0', 'x1'],
        'domain': [[-1.0, 1.0], [-1.0, 1.0]],
        'periodic': [False, False],
        'metric': [['1', '0'], ['0', '1']],
        'weight': '1',
        'curvature': 0.0,
        'family': 'bump',
        'monomials': ['x0', 'x1'],
        'bump_factor': 'bump((x0*x0+x1*x1)/0.81)',
        'resolution': [96, 96],
    },
    'torus': {
        'description': 'Flat unweighted torus with period 2*pi on both axes.',
        'dim': 2,
        'coords': ['x0', 'x1'],
        'domain': [[0.0, '2*pi'], [0.0, '2*pi']],
        'periodic': [True, True],
        'metric': [['1', '0'], ['0', '1']],
        'weight': '1',
        'curvature': 0.0,
        'family': 'trig',
        'monomials': [],
        'bump_factor': None,
        'resolution': [64, 64],
    },
    'weighted-torus': {
        'description': 'Flat torus of period 2*pi carrying the weight exp(sin(x0)).',
        'dim': 2,
        'coords': ['x0', 'x1'],
        'domain': [[0.0, '2*pi'], [0.0, '2*pi']],
        'periodic': [True, True],
        'metric': [['1', '0'], ['0', '1']],
        'weight': 'exp(sin(x0))',
        'curvature': 0.0,
        'family': 'trig',
        'monomials': [],
        'bump_factor': None,
        'resolution': [64, 64],
    },
    'sphere': {
        'description': 'Unit sphere in the (theta, phi) chart, periodic in phi; fields vanish near the poles.',
        'dim': 2,
        'coords': ['theta', 'phi'],
        'domain': [[0.0, 'pi'], [0.0, '2*pi']],
        'periodic': [False, True],
        'metric': [['1', '0'], ['0', 'sin(theta)^2']],
        'weight': '1',
        'curvature': 1.0,
        'family': 'bump',
        'monomials': ['sin(theta)*cos(phi)', 'sin(theta)*sin(phi)', 'cos(theta)'],
        'bump_factor': 'bump(((theta-pi/2)/1.3)^2)',
        'resolution': [96, 96],
    },
    'hyperbolic-disk': {
        'description': 'Poincare disk, curvature -1, on the box [-0.7,0.7]^2; fields supported in r < 0.65.',
        'dim': 2,
        'coords': ['x', 'y'],
        'domain': [[-0.7, 0.7], [-0.7, 0.7]],
        'periodic': [False, False],
        'metric': [['4/(1-x^2-y^2)^2', '0'], ['0', '4/(1-x^2-y^2)^2']],
        'weight': '1',
        'curvature': -1.0,
        'family': 'bump',
        'monomials': ['x', 'y'],
        'bump_factor': 'bump((x*x+y*y)/0.4225)',
        'resolution': [96, 96],
    },
    'gauss-weighted-plane': {
        'description': 'Flat plane on [-6,6]^2 with Gaussian weight exp(-|x|^2/2); fields supported in r < 5.',
        'dim': 2,
        'coords': ['x0', 'x1'],
        'domain': [[-6.0, 6.0], [-6.0, 6.0]],
        'periodic': [False, False],
        'metric': [['1', '0'], ['0', '1']],
        'weight': 'exp(-(x0^2+x1^2)/2)',
        'curvature': 0.0,
        'family': 'bump',
        'monomials': ['x0/5', 'x1/5'],
        'bump_factor': 'bump((x0*x0+x1*x1)/25)',
        'resolution': [96, 96],
    },
}


# Checks
CHECKS = {
    'conscov': {
        'kind': 'identity',
        'tolerance': 'family',
        'description': 'Distributional covariant derivative agrees with the classical pairing',
        'statement': 'D_X Y (W) = int <nabla_X Y, W> dm',
    },
    'divle': {
        'kind': 'identity',
        'tolerance': 'family',
        'description': 'Divergence of h[X,Y] by direct differentiation vs the divergence lemma',
        'statement': 'div(h[X,Y]) = div(X div(hY) - Y div(hX))',
    },
    'lief': {
        'kind': 'identity',
        'tolerance': 'family',
        'description': 'Distributional bracket paired with g grad f vs the four-term integral',
        'statement': '[X,Y](g grad f) = int -X(g)Y(f) - gY(f)divX + Y(g)X(f) + gX(f)divY dm',
    },
    'jacobi': {
        'kind': 'identity',
        'tolerance': 'family',
        'description': 'Jacobi identity for the distributional bracket, plus the expanded bracket-of-bracket route',
        'statement': '[[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y] = 0',
    },
    'r1a': {
        'kind': 'identity',
        'tolerance': EXACT_TOLERANCE,
        'description': 'Curvature operator is antisymmetric in X and Y',
        'statement': 'R(X,Y)Z + R(Y,X)Z = 0',
    },
    'zw': {
        'kind': 'identity',
        'tolerance': 'family',
        'description': 'Curvature tensor is antisymmetric in Z and W',
        'statement': 'R(X,Y,Z,W) + R(X,Y,W,Z) = 0',
    },
    'r1b': {
        'kind': 'identity',
        'tolerance': 'family',
        'description': 'Pair symmetry of the curvature tensor',
        'statement': 'R(X,Y,Z,W) = R(Z,W,X,Y)',
    },
    'bianchi': {
        'kind': 'identity',
        'tolerance': 'family',
        'description': 'First Bianchi identity',
        'statement': 'R(X,Y)Z + R(Y,Z)X + R(Z,X)Y = 0',
    },
    'tensorial': {
        'kind': 'identity',
        'tolerance': 'family',
        'description': 'Test-function multiplication in any slot equals the module action',
        'statement': 'R(fX,Y,Z,W) = R(X,fY,Z,W) = R(X,Y,fZ,W) = R(X,Y,Z,fW) = fR(X,Y,Z,W)',
    },
    'module': {
        'kind': 'identity',
        'tolerance': EXACT_TOLERANCE,
        'description': 'Module action on the dual of test vector fields',
        'statement': '(fT)(W) = T(fW) and f(gT) = (fg)T',
    },
    'oracle': {
        'kind': 'oracle',
        'tolerance': 'family',
        'description': 'Distributional curvature vs the classical Riemann tensor',
        'statement': 'R(X,Y,Z,W)(f) = int f <R(X,Y)Z, W> dm',
    },
    'convergence': {
        'kind': 'convergence',
        'tolerance': 'family',
        'description': 'Residual ladder under grid refinement with fitted order',
        'statement': 'residual -> 0 with order >= 2 (spectral on periodic grids)',
    },
    'conjecture': {
        'kind': 'conjecture',
        'tolerance': 'family',
        'description': 'Sectional lower bound probe on constant-curvature backends',
        'statement': 'R(X,Y,Y,X)(f) >= k int f |X^Y|^2 dm for f >= 0',
    },
}

IDENTITY_CHECKS = [name for name, info in CHECKS.items() if info['kind'] == 'identity']


def get_backend_config(name: str) -> dict:
    """Return the registry entry for a built-in backend."""
    if name not in BACKENDS:
        supported = "\n".join(f"  - {backend}" for backend in BACKENDS)
        raise ValueError(
            f"Backend '{name}' is not supported.\n\n"
            f"Supported backends:\n{supported}"
        )
    return BACKENDS[name]


def get_check_config(check_id: str) -> dict:
    """Return the registry entry for a check id."""
    from .errors import UnknownCheckError

    if check_id not in CHECKS:
        supported = "\n".join(f"  - {name}" for name in CHECKS)
        raise UnknownCheckError(
            f"Check '{check_id}' is not supported.\n\n"
            f"Supported checks:\n{supported}"
        )
    return CHECKS[check_id]


def resolve_tolerance(check_id: str, family: str) -> float:
    """Default tolerance of a check for a field family."""
    policy = get_check_config(check_id)['tolerance']
    if policy == 'family':
        return FAMILY_TOLERANCES[family]
    return float(policy)
