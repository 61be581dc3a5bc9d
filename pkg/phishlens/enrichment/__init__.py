from .hosts import extract_primary_host
from .virustotal import VirusTotalClient, vt_lookup, vt_url_id
from .geolocation import BigDataCloudService, StaticGeoMap, dns_resolver, geolocate_host
from .simulator import (
    DEFAULT_CONDITIONS,
    load_condition_table,
    resolve_condition,
    simulate_enrichment,
)
from .enricher import Enricher, EnrichmentMode, enrich, enrichment_cache
