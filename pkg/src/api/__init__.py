"""FastAPI backend"""
