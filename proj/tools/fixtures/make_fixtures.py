#!/usr/bin/env python3
"""Renders the synthetic fixture corpus under fixtures/corpus/.

The report texts live here; their hand-written annotations live in
fixtures/gold.json. Re-running the script rewrites the HTML files.
"""
import html
import pathlib

ROOT = pathlib.Path(__file__).resolve().parents[2]
OUT = ROOT / "fixtures" / "corpus"

NAV = '<nav class="site"><a href="/">Home</a> <a href="/about">About</a></nav>'
FOOT = '<footer>Copyright fixture site. All rights reserved.</footer>'


def page(title, body):
    return (f"<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{html.escape(title)}</title>"
            f"<script>var tracking = 1;</script></head>\n<body>\n{NAV}\n{body}\n{FOOT}\n</body></html>\n")


def paras(lines):
    return "\n".join(f"<p>{html.escape(l)}</p>" for l in lines)


def items(values, cls):
    lis = "".join(f"<li>{html.escape(v)}</li>" for v in values)
    return f'<ul class="{cls}">{lis}</ul>'


def encyclopedia(slug, name, aliases, platform, first_seen, iocs, body):
    content = f"""<article class="entry malware">
<h1 class="entry-title">{html.escape(name)}</h1>
<div class="facts"><span class="platform">{html.escape(platform)}</span> <span class="first-seen">{first_seen}</span></div>
<h3>Aliases</h3>{items(aliases, "aliases")}
<div class="description">
{paras(body)}
</div>
<h3>Indicators</h3>{items(iocs, "iocs")}
</article>"""
    return slug, page(name + " | Fixture Labs", content)


def vuln(slug, cve, severity, published, cvss, refs, body):
    content = f"""<div class="vuln">
<h1 id="vuln-id">{cve}</h1>
<table class="meta"><tr><th>Severity</th><td class="severity">{severity}</td></tr>
<tr><th>Published</th><td class="published">{published}</td></tr>
<tr><th>CVSS</th><td class="cvss">{cvss}</td></tr></table>
<div class="summary">
{paras(body)}
</div>
<h3>References</h3>{items(refs, "refs")}
</div>"""
    return slug, page(cve + " | Fixture VulnDB", content)


def blog(slug, title, body, refs=(), iocs=(), kind="attack", with_title=True):
    head = f'<h2 class="post-title">{html.escape(title)}</h2>' if with_title else ""
    extra = ""
    if refs:
        extra += "<h4>References</h4>" + items(refs, "post-refs")
    if iocs:
        extra += "<h4>Indicators</h4>" + items(iocs, "indicators")
    content = f"""<article class="post" data-kind="{kind}">
{head}
<div class="post-body">
{paras(body)}
</div>
{extra}
</article>
<aside class="sidebar">Subscribe to our newsletter for weekly research.</aside>"""
    return slug, page(title + " | Fixture Threat Research", content)


ENCYCLOPEDIA = [
    encyclopedia(
        "wannacry", "WannaCry", ["WannaCrypt", "WCry", "Wanna Decryptor"], "Windows", "2017-05-12",
        ["84c82835a5d21bbcf75a61706d8ab549", "iuqerfsodp9ifjaposdfjhgosurijfaewrwergwea[.]com"],
        [
            "WannaCry is a ransomware worm that spread across the world in May 2017.",
            "WannaCry uses EternalBlue to reach unpatched hosts over SMBv1.",
            "On each victim WannaCry drops tasksche.exe in the ProgramData folder.",
            "The dropper writes C:\\ProgramData\\tasksche.exe and registers it as a service.",
            "Before encryption starts the worm checks the kill switch domain iuqerfsodp9ifjaposdfjhgosurijfaewrwergwea[.]com and stops when it answers.",
        ]),
    encyclopedia(
        "notpetya", "NotPetya", ["ExPetr", "Nyetya"], "Windows", "2017-06-27",
        ["027cc450ef5f8c5f653329641ec1fed91f694e0d229928963b30f6b0d7d3a745", "perfc.dat"],
        [
            "NotPetya is a destructive wiper disguised as ransomware.",
            "The initial infection vector was a trojanized update of the MEDoc accounting package.",
            "NotPetya uses Mimikatz to collect credentials from memory.",
            "NotPetya spreads through lateral movement with stolen passwords.",
            "The payload is written to C:\\Windows\\perfc.dat on every host.",
        ]),
    encyclopedia(
        "emotet", "Emotet", ["Geodo", "Heodo"], "Windows", "2014-06-01",
        ["ecf8f1bcc2f9c4f1d2e7a5c0f33e2b1a", "45.33.54.214"],
        [
            "Emotet began as a banking trojan and became a loader for other families.",
            "Emotet arrives through phishing messages with macro-laden Microsoft Word documents.",
            "Infected hosts contact 45.33.54.214 for new modules.",
            "Emotet downloads TrickBot onto selected victims.",
            "Operators also rely on PowerShell for staging.",
        ]),
    encyclopedia(
        "trickbot", "TrickBot", ["TrickLoader"], "Windows", "2016-10-01",
        ["a3d3f5c0a3a4e7c9b0e3b4c1d2e5f6a7"],
        [
            "TrickBot is a modular banking trojan maintained by Wizard Spider.",
            "TrickBot steals browser credentials with a dedicated module.",
            "TrickBot deploys Ryuk on high value networks.",
            "The trojan persists through a scheduled task named after a system updater.",
            "Its configuration is stored under %APPDATA%\\WinDefrag\\settings.ini on disk.",
        ]),
    encyclopedia(
        "cozycar", "CozyCar", ["CozyDuke malware", "CozyBear implant"], "Windows", "2014-09-01",
        ["d9b2a8f4e3f63b2c5a7b8c9d0e1f2a3b4c5d6e7f", "office-update-check[.]com"],
        [
            "CozyCar is a modular backdoor tied to the CozyDuke intrusion set.",
            "CozyDuke deploys CozyCar after a successful spearphishing attempt.",
            "CozyCar communicates with office-update-check[.]com over HTTPS.",
            "The backdoor is installed as C:\\Users\\Public\\Libraries\\ntsvc.exe on victims.",
            "CozyCar uses process injection to hide inside a browser process.",
        ]),
    encyclopedia(
        "xagent", "X-Agent", ["Sofacy implant", "CHOPSTICK"], "Windows, Linux", "2013-01-01",
        ["5f3e2d1c0b9a8f7e6d5c4b3a2f1e0d9c", "185.86.148.227"],
        [
            "X-Agent is a cross-platform implant of Fancy Bear.",
            "Fancy Bear installs X-Agent after initial access.",
            "The implant supports keylogging and file theft.",
            "X-Agent communicates with 185.86.148.227 through an HTTP proxy chain.",
            "Builds exist for Windows and Linux targets.",
        ]),
    encyclopedia(
        "shamoon", "Shamoon", ["Disttrack"], "Windows", "2012-08-15",
        ["b14299fd4d1cbfb4cc7486d978398214"],
        [
            "Shamoon is a disk wiping malware first seen against the energy sector in 2012.",
            "Shamoon overwrites the master boot record of each infected machine.",
            "The dropper spreads through network shares with harvested domain credentials.",
            "Shamoon creates the service file C:\\Windows\\System32\\trksvr.exe to run its components.",
        ]),
]

VULNDB = [
    vuln("cve-2017-0144", "CVE-2017-0144", "Critical", "2017-03-14", "8.1",
         ["https://fixture-vulndb.example/advisories/ms17-010"],
         [
             "A remote code execution flaw exists in the SMBv1 server of Microsoft Windows.",
             "EternalBlue exploits the flaw to run code with kernel privileges.",
             "WannaCry leveraged EternalBlue during the May 2017 outbreak.",
             "Administrators should disable SMBv1 and apply the March 2017 update.",
         ]),
    vuln("cve-2017-5638", "CVE-2017-5638", "Critical", "2017-03-10", "10.0",
         ["https://fixture-vulndb.example/advisories/s2-045"],
         [
             "Apache Struts mishandles the Content-Type header in the Jakarta multipart parser.",
             "Attackers send crafted headers to achieve remote code execution.",
             "Exploit traffic was observed from 91.230.47.31 within days of disclosure.",
             "Upgrading Apache Struts removes the flaw.",
         ]),
    vuln("cve-2019-19781", "CVE-2019-19781", "Critical", "2019-12-17", "9.8",
         ["https://fixture-vulndb.example/advisories/ctx267027"],
         [
             "A path traversal flaw in Citrix ADC allows unauthenticated code execution.",
             "Scanners request /vpn/../vpns/cfg/smb.conf to test for the flaw.",
             "APT41 exploited Citrix ADC in early 2020 campaigns.",
             "Mitigation steps were published before a permanent fix.",
         ]),
    vuln("cve-2021-44228", "CVE-2021-44228", "Critical", "2021-12-10", "10.0",
         ["https://fixture-vulndb.example/advisories/log4shell"],
         [
             "Apache Log4j evaluates JNDI lookups in logged strings, which allows remote code execution.",
             "Payloads fetch a class from http://198.51.100.23:8080/Exploit.class when logged.",
             "Threat actors used Cobalt Strike after exploiting the flaw.",
             "Version 2.17.1 of the library closes the remaining gaps.",
         ]),
    vuln("cve-2017-11882", "CVE-2017-11882", "High", "2017-11-14", "7.8",
         ["https://fixture-vulndb.example/advisories/equation-editor"],
         [
             "A memory corruption flaw in the Equation Editor of Microsoft Office allows code execution.",
             "Cobalt Group exploited Microsoft Office through malicious RTF documents.",
             "Opened documents download a loader from hxxp://update-office365[.]net/load.bin when the flaw triggers.",
             "The Equation Editor component was removed in a later update.",
         ]),
    vuln("cve-2018-13379", "CVE-2018-13379", "Critical", "2019-06-04", "9.8",
         ["https://fixture-vulndb.example/advisories/fg-ir-18-384"],
         [
             "A path traversal flaw in the SSL VPN web portal of Fortinet FortiOS exposes session files.",
             "Attackers read plaintext credentials from the sslvpn_websession file.",
             "APT29 targeted Fortinet FortiOS appliances to obtain initial access.",
             "Resetting all VPN passwords is required after patching.",
         ]),
]

BLOG = [
    blog("cozyduke-spearphishing-wave", "CozyDuke returns with a spearphishing wave", [
        "Our team tracked a new campaign by CozyDuke against diplomatic targets.",
        "CozyDuke uses spearphishing with links to compressed archives.",
        "The archive contains a shortcut that launches PowerShell in a hidden window.",
        "CozyDuke deploys CozyCar on hosts of interest.",
        "Victims received mail from press-office@diplomatic-mail[.]org during the campaign.",
    ], refs=["https://fixture-blog.example/2015/cozyduke"],
        iocs=["diplomatic-mail[.]org", "7c3b3a1b8f9e4a2d6c5b0e1f2a3b4c5d"]),
    blog("fancy-bear-election-phish", "Fancy Bear phishing against election staff", [
        "Fancy Bear ran a credential theft operation against election staff.",
        "Fancy Bear uses spearphishing with lookalike login pages.",
        "The lure pages were hosted on accounts-verify[.]net behind a free certificate.",
        "Stolen sessions were later used to access Microsoft Exchange mailboxes.",
        "Fancy Bear installed X-Agent on two workstations.",
    ], refs=["https://fixture-blog.example/2016/fancy-bear"],
        iocs=["accounts-verify[.]net"]),
    blog("lazarus-wannacry-link", "Code overlap links WannaCry to Lazarus Group", [
        "Early WannaCry samples share code with older backdoors.",
        "Lazarus Group deployed WannaCry in a limited test before the worm release.",
        "The same group used Mimikatz during earlier bank intrusions.",
        "Lazarus Group targets financial institutions across Asia.",
    ], refs=["https://fixture-blog.example/2017/lazarus-overlap"]),
    blog("sandworm-notpetya", "Sandworm Team and the NotPetya outbreak", [
        "Sandworm Team distributed NotPetya through a compromised update server.",
        "The wiper spread to multinational networks within hours.",
        "NotPetya leveraged EternalBlue for spreading between subnets.",
        "Sandworm Team previously used BlackEnergy against power distribution companies.",
    ]),
    blog("emotet-trickbot-ryuk", "From Emotet to Ryuk in two days", [
        "An incident response case showed a familiar chain of infections.",
        "Emotet downloaded TrickBot within hours of the first phishing email.",
        "TrickBot ran AdFind to enumerate the domain.",
        "Operators used Cobalt Strike for lateral movement.",
        "Ryuk encrypted file servers on the second day.",
        "The ransom note was written to C:\\Users\\Public\\RyukReadMe.txt on every server.",
    ], iocs=["e8a2d4b6c8f0a1b3d5e7f9a0b2c4d6e8", "RyukReadMe.txt"]),
    blog("turla-satellite", "Turla hides command traffic in satellite links", [
        "Turla is a long running espionage group focused on governments.",
        "Turla uses ComRAT as a second stage backdoor.",
        "ComRAT reads commands from a Gmail inbox.",
        "Earlier operations relied on a watering hole against ministry websites.",
    ]),
    blog("apt41-log4j", "APT41 moves quickly on Log4j", [
        "APT41 exploited Apache Log4j on public web servers within a day of disclosure.",
        "After access the group launched Cobalt Strike beacons from memory.",
        "Cobalt Strike contacted 203.0.113.77 over HTTPS.",
        "APT41 used Mimikatz for credential dumping on domain controllers.",
    ], refs=["https://fixture-blog.example/2022/apt41-log4j"]),
    # Multi-page report: page 2 carries no title and continues the body.
    blog("fin7-winter-harbor", "Operation Winter Harbor: FIN7 targets hospitality", [
        "FIN7 mailed malicious attachments to hotel front desks.",
        "The documents run PowerShell through macro execution.",
        "Mimikatz was used by FIN7 to dump credentials.",
    ]),
]

BLOG_PAGE2 = blog("fin7-winter-harbor.page2", "", [
    "On the second day FIN7 deployed Dridex on payment systems.",
    "Dridex communicates with hotel-reservations-cdn[.]com for tasking.",
    "PsExec was used by the operators to move between point of sale servers.",
    "A registry value under HKCU\\Software\\Microsoft\\Windows\\CurrentVersion\\Run\\HotelSync keeps the loader alive.",
], iocs=["hotel-reservations-cdn[.]com", "HKCU\\Software\\Microsoft\\Windows\\CurrentVersion\\Run\\HotelSync"],
    with_title=False)

# Pages the checkers must drop.
ADS = [
    blog("ad-firewall-sale", "Firewall sale: buy now", [
        "Buy the best firewall deal today with a discount coupon.",
        "Order now and get free shipping on every sale item.",
        "This cheap offer ends soon so buy before prices go up.",
        "Subscribe to the shop for more deals and promo codes.",
        "Every order ships free this week with our bargain price guarantee.",
    ]),
    blog("ad-vpn-deal", "VPN deal of the week", [
        "Get our VPN deal at half price with this coupon.",
        "Buy a yearly plan and save more on every order.",
        "Limited sale offer: free shipping on hardware tokens.",
        "Cheap prices for teams, subscribe and shop today.",
        "Another discount promo lands in your inbox when you subscribe.",
    ]),
    blog("ad-training-offer", "Security training offer", [
        "Sponsored: buy security awareness training at a discount.",
        "Order the bundle today and the deal includes free shipping of printed guides.",
        "Coupon holders get the lowest price of the sale season.",
        "Shop now, subscribe, and receive every promo first.",
        "Cheap seats sell out quickly so order before the offer ends.",
    ]),
]

SHORT = [blog("short-notice", "Maintenance notice", ["The blog is offline tonight."])]


def main():
    sources = {
        "fixture-encyclopedia": ENCYCLOPEDIA,
        "fixture-vulndb": VULNDB,
        "fixture-blog": BLOG + [BLOG_PAGE2] + ADS + SHORT,
    }
    for source, pages in sources.items():
        d = OUT / source
        d.mkdir(parents=True, exist_ok=True)
        for old in d.glob("*.html"):
            old.unlink()
        for slug, text in pages:
            (d / f"{slug}.html").write_text(text, encoding="utf-8")
    # Byte-identical copy under another name: dropped as a duplicate.
    blog_dir = OUT / "fixture-blog"
    (blog_dir / "zz-mirror-turla-satellite.html").write_bytes((blog_dir / "turla-satellite.html").read_bytes())


if __name__ == "__main__":
    main()
