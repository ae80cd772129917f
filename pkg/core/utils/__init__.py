from . import misc
from . import logging
