"""
API Routers
Spectral and geometry endpoints, included by app.main
"""
