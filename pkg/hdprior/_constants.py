

# first entry is the default (canonical where R uses it) link of the family
ADMISSIBLE_LINKS = {
    'gaussian': ('identity', 'log', 'inverse'),
    'binomial': ('logit', 'probit', 'cauchit', 'log', 'cloglog'),
    'poisson': ('log', 'identity', 'sqrt'),
    'gamma': ('inverse', 'identity', 'log'),
    'inverse_gaussian': ('inverse_squared', 'inverse', 'identity', 'log'),
}

PRIOR_KINDS = ('initial', 'pp', 'npp', 'napp', 'bhm', 'cp', 'rmap', 'leap')
COMMANDS = ('fit', 'lognc', 'rmap', 'evidence', 'bf', 'survexpand')

INTERCEPT = '(Intercept)'
DISPERSION = 'dispersion'

# glm fitting
IRLS_TOL = 1e-8
IRLS_MAX_ITER = 100
MAX_COEF_NORM = 1e6
MU_CLAMP = 1e-12

# sampler
DIVERGENCE_THRESHOLD = 1000.0
INIT_ATTEMPTS = 100

# evidence
BRIDGE_TOL = 1e-10
BRIDGE_MAX_ITER = 1000
BRIDGE_MIN_DRAWS = 1000
GRID_SIZE = 21
LOESS_SPAN = 0.75
RHAT_WARN = 1.05
