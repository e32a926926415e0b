import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "DIF.settings")
django.setup()
