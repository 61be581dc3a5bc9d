from . import config
from . import misc
from . import ratelimit
