/** Payload types of the chat backend's JSON API. */

export interface SessionResponse {
  session_id: string;
  greeting: string;
}

export interface StatusCardAttachment {
  type: 'status_card';
  region: string;
  cases: number;
  deaths: number;
  recovered: number;
  retrieved: string;
  trend: string;
  source: string;
  publisher: string;
}

export interface SymptomItem {
  name: string;
  synonyms: string[];
  prevalence_percent: number;
}

export interface SymptomListAttachment {
  type: 'symptom_list';
  items: SymptomItem[];
}

export interface MapAttachment {
  type: 'map';
  region: string | null;
}

export type Attachment = StatusCardAttachment | SymptomListAttachment | MapAttachment;

export interface MessageResponse {
  reply: string;
  attachment: Attachment | null;
  quick_replies: string[];
  state: string;
}

export interface MapPoint {
  country: string;
  lat: number;
  lon: number;
  cases: number;
  deaths: number;
  recovered: number;
}

export type Author = 'user' | 'bot';
