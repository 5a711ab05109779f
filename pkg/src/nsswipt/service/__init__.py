"""HTTP front end: pydantic schemas, shared handlers and the FastAPI app."""
