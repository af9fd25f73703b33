# API Module
# FastAPI routes in front of the analysis and solver agents

from .routes import router

__all__ = ['router']
