from .log import init
