# pressurelab/services/__init__.py
